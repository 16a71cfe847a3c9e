#include "arbirg/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace arbirg {

void ProblemSpec::map(const Vector& x, Eigen::Ref<Vector> out) const
{
    for (std::size_t i = 0; i < structure->num_blocks(); ++i) {
        map_block(x, i, out.segment(structure->offset(i), structure->block_dim(i)));
    }
}

Vector ProblemSpec::map(const Vector& x) const
{
    Vector out(dim());
    map(x, out);
    return out;
}

void ProblemSpec::subgradient(const Vector& x, Eigen::Ref<Vector> out) const
{
    for (std::size_t i = 0; i < structure->num_blocks(); ++i) {
        subgrad_block(x, i, out.segment(structure->offset(i), structure->block_dim(i)));
    }
}

Vector ProblemSpec::subgradient(const Vector& x) const
{
    Vector out(dim());
    subgradient(x, out);
    return out;
}

Vector ProblemSpec::project(const Vector& v) const
{
    Vector out = v;
    for (std::size_t i = 0; i < structure->num_blocks(); ++i) {
        project_inplace(sets[i], out.segment(structure->offset(i), structure->block_dim(i)));
    }
    return out;
}

void ProblemSpec::project_block(std::size_t block, Eigen::Ref<Vector> v) const
{
    project_inplace(sets[block], v);
}

bool ProblemSpec::contains(const Vector& x, double tol) const
{
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < structure->num_blocks(); ++i) {
        if (!arbirg::contains(sets[i], structure->segment(x, i), tol)) return false;
    }
    return true;
}

bool ProblemSpec::bounded() const
{
    for (const auto& s : sets) {
        if (!s.bounded()) return false;
    }
    return true;
}

double ProblemSpec::max_norm() const
{
    double sq = 0.0;
    for (const auto& s : sets) {
        const double m = s.max_norm();
        sq += m * m;
    }
    return std::sqrt(sq);
}

Vector ProblemSpec::sample_feasible(Rng& rng) const
{
    Vector out(dim());
    for (std::size_t i = 0; i < structure->num_blocks(); ++i) {
        structure->segment(out, i) = arbirg::sample_feasible(sets[i], rng);
    }
    return out;
}

void ProblemSpec::validate() const
{
    if (!structure) throw std::invalid_argument("ProblemSpec: missing block structure");
    if (sets.size() != structure->num_blocks()) {
        throw std::invalid_argument("ProblemSpec: one set descriptor per block is required");
    }
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (sets[i].dim() != structure->block_dim(i)) {
            throw std::invalid_argument("ProblemSpec: set dimension differs from block dimension");
        }
    }
    if (!map_block || !objective || !subgrad_block) {
        throw std::invalid_argument("ProblemSpec: mapping, objective and subgradient evaluators are required");
    }
    if (known_solution && known_solution->size() != structure->dim()) {
        throw std::invalid_argument("ProblemSpec: known solution has wrong dimension");
    }
}

Vector random_initial_point(const ProblemSpec& problem, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(problem.dim());
    for (Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
    return problem.project(v);
}

} // namespace arbirg
