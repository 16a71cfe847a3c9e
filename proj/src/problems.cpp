#include "arbirg/problems.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace arbirg {

namespace {

StructurePtr make_structure(StructurePtr structure, Index n)
{
    if (structure) {
        if (structure->dim() != n) {
            throw std::invalid_argument("block structure dimension does not match problem dimension");
        }
        return structure;
    }
    return std::make_shared<const BlockStructure>(BlockStructure::uniform(1, n));
}

double spectral_norm(const Matrix& A)
{
    if (A.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(A);
    return svd.singularValues()(0);
}

/// Largest value of ||A^T (Ax - b)|| over the vertices of a bounded box (the map norm is convex).
double max_affine_residual_norm_on_box(const Matrix& A, const Vector& b, const Vector& lower, const Vector& upper)
{
    const Index n = lower.size();
    if (n > 20) {
        const double norm_a = spectral_norm(A);
        const double radius = lower.cwiseAbs().cwiseMax(upper.cwiseAbs()).norm();
        return norm_a * (norm_a * radius + b.norm());
    }
    double best = 0.0;
    Vector x(n);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        for (Index i = 0; i < n; ++i) {
            x[i] = (mask >> i) & 1U ? upper[i] : lower[i];
        }
        best = std::max(best, (A.transpose() * (A * x - b)).norm());
    }
    return best;
}

std::vector<Index> indices_of(std::uint64_t mask, Index n, bool set)
{
    std::vector<Index> out;
    for (Index i = 0; i < n; ++i) {
        if ((((mask >> i) & 1U) != 0U) == set) out.push_back(i);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cournot helpers
// ---------------------------------------------------------------------------

struct CournotModel {
    CournotParams p;
    Index J;

    double sales_total(const Vector& x, Index j) const
    {
        double total = 0.0;
        for (std::size_t i = 0; i < p.firms; ++i) {
            total += x[static_cast<Index>(i) * 2 * J + J + j];
        }
        return total;
    }

    // sbar^sigma and sbar^(sigma-1); the latter only ever multiplies s_ij <= sbar,
    // so it is taken as 0 at sbar = 0.
    std::pair<double, double> powers(double sbar) const
    {
        if (sbar <= 0.0) return {0.0, 0.0};
        const double pw1 = std::pow(sbar, p.sigma - 1.0);
        return {pw1 * sbar, pw1};
    }
};

} // namespace

// ---------------------------------------------------------------------------
// Cournot
// ---------------------------------------------------------------------------

void validate(const CournotParams& p)
{
    const auto d = static_cast<Index>(p.firms);
    const auto J = static_cast<Index>(p.nodes);
    if (d < 1 || J < 1) throw std::invalid_argument("Cournot: need at least one firm and one node");
    if (p.cost_slopes.rows() != d || p.cost_slopes.cols() != J) {
        throw std::invalid_argument("Cournot: cost slope matrix must be firms x nodes");
    }
    if (p.caps.rows() != d || p.caps.cols() != J) throw std::invalid_argument("Cournot: caps must be firms x nodes");
    if (p.alpha.size() != J || p.beta.size() != J) throw std::invalid_argument("Cournot: alpha/beta need one entry per node");
    if (!(p.alpha.array() > 0.0).all() || !(p.beta.array() > 0.0).all()) {
        throw std::invalid_argument("Cournot: alpha and beta must be positive");
    }
    if (!(p.caps.array() > 0.0).all()) throw std::invalid_argument("Cournot: caps must be positive");
    if (!(p.sigma >= 1.0)) throw std::invalid_argument("Cournot: sigma must be at least 1");
    if (p.sigma > 1.0) {
        const double limit = (3.0 * p.sigma - 1.0) / (p.sigma - 1.0);
        if (p.sigma > 3.0 || static_cast<double>(p.firms) > limit) {
            std::ostringstream msg;
            msg << "Cournot: monotonicity guard violated (need sigma = 1, or 1 < sigma <= 3 and d <= "
                << limit << ")";
            throw std::invalid_argument(msg.str());
        }
    }
}

ProblemSpec build_cournot(const CournotParams& params)
{
    validate(params);
    const auto d = params.firms;
    const auto J = static_cast<Index>(params.nodes);
    auto model = std::make_shared<const CournotModel>(CournotModel{params, J});

    ProblemSpec prob;
    {
        std::ostringstream id;
        id << "cournot_d" << d << "_J" << J;
        prob.id = id.str();
    }
    prob.structure = std::make_shared<const BlockStructure>(BlockStructure::uniform(d, 2 * J));
    for (std::size_t i = 0; i < d; ++i) {
        prob.sets.push_back(SetDescriptor::balanced_box(params.caps.row(static_cast<Index>(i)).transpose()));
    }

    prob.map_block = [model](const Vector& x, std::size_t i, Eigen::Ref<Vector> out) {
        const auto& p = model->p;
        const Index J = model->J;
        const Index off = static_cast<Index>(i) * 2 * J;
        const auto row = static_cast<Index>(i);
        for (Index j = 0; j < J; ++j) {
            const auto [pw, pw1] = model->powers(model->sales_total(x, j));
            out[j] = p.cost_slopes(row, j);
            out[J + j] = -p.alpha[j] + p.beta[j] * pw + p.sigma * p.beta[j] * x[off + J + j] * pw1;
        }
    };

    prob.subgrad_block = [model](const Vector& x, std::size_t i, Eigen::Ref<Vector> out) {
        const auto& p = model->p;
        const Index J = model->J;
        const auto row = static_cast<Index>(i);
        for (Index j = 0; j < J; ++j) {
            const auto [pw, pw1] = model->powers(model->sales_total(x, j));
            (void)pw1;
            out[j] = p.cost_slopes(row, j);
            out[J + j] = -p.alpha[j] + (1.0 + p.sigma) * p.beta[j] * pw;
        }
    };

    prob.objective = [model](const Vector& x) {
        const auto& p = model->p;
        const Index J = model->J;
        double total = 0.0;
        for (std::size_t i = 0; i < p.firms; ++i) {
            const Index off = static_cast<Index>(i) * 2 * J;
            for (Index j = 0; j < J; ++j) total += p.cost_slopes(static_cast<Index>(i), j) * x[off + j];
        }
        for (Index j = 0; j < J; ++j) {
            const double sbar = model->sales_total(x, j);
            const auto [pw, pw1] = model->powers(sbar);
            (void)pw1;
            total -= sbar * (p.alpha[j] - p.beta[j] * pw);
        }
        return total;
    };

    prob.map_vjp = [model](const Vector& y, const Vector& v, Eigen::Ref<Vector> out) {
        const auto& p = model->p;
        const Index J = model->J;
        const auto firms = static_cast<Index>(p.firms);
        out.setZero();
        for (Index j = 0; j < J; ++j) {
            const double sbar = model->sales_total(y, j);
            if (sbar <= 0.0 && p.sigma > 1.0) {
                // d F_s / d s vanishes at sbar = 0 under the zero-product convention
                continue;
            }
            const auto [pw, pw1] = model->powers(sbar);
            (void)pw;
            const double diag = p.sigma * p.beta[j] * (sbar > 0.0 ? pw1 : 1.0);
            double sum_v = 0.0;
            double sum_vs = 0.0;
            for (Index i = 0; i < firms; ++i) {
                const Index k = i * 2 * J + J + j;
                sum_v += v[k];
                sum_vs += v[k] * y[k];
            }
            const double curvature =
                sbar > 0.0 ? p.sigma * (p.sigma - 1.0) * p.beta[j] * pw1 / sbar * sum_vs : 0.0;
            for (Index i = 0; i < firms; ++i) {
                const Index k = i * 2 * J + J + j;
                out[k] = diag * (sum_v + v[k]) + curvature;
            }
        }
    };

    // Constants from the caps: s_ij <= sum_j' B_ij' and sbar_j <= sum_ij' B_ij'.
    const double total_caps = params.caps.sum();
    const double sbar_max = total_caps;
    double cf_sq = 0.0;
    double cF_sq = 0.0;
    double lip_F = 0.0;
    double lip_f = 0.0;
    const double sig = params.sigma;
    const double pw1_max = std::max(1.0, std::pow(sbar_max, sig - 1.0));
    for (std::size_t i = 0; i < d; ++i) {
        const auto row = static_cast<Index>(i);
        const double s_max = params.caps.row(row).sum();
        for (Index j = 0; j < J; ++j) {
            const double c = params.cost_slopes(row, j);
            const double a = params.alpha[j];
            const double be = params.beta[j];
            const double upper_F = -a + be * std::pow(sbar_max, sig) + sig * be * s_max * std::pow(sbar_max, sig - 1.0);
            const double upper_f = -a + (1.0 + sig) * be * std::pow(sbar_max, sig);
            cF_sq += c * c + std::pow(std::max(a, std::abs(upper_F)), 2);
            cf_sq += c * c + std::pow(std::max(a, std::abs(upper_f)), 2);
        }
    }
    for (Index j = 0; j < J; ++j) {
        const double be = params.beta[j];
        const double dd = static_cast<double>(d);
        lip_F = std::max(lip_F, (sig * be * (dd + 1.0) + sig * (sig - 1.0) * be * std::sqrt(dd)) * pw1_max);
        lip_f = std::max(lip_f, dd * (1.0 + sig) * sig * be * pw1_max);
    }
    prob.constants.M = prob.max_norm();
    prob.constants.C_F = std::sqrt(cF_sq);
    prob.constants.C_f = std::sqrt(cf_sq);
    prob.constants.L_F = lip_F;
    prob.constants.L_f = lip_f;
    prob.constants.mu_f = 0.0;
    prob.constants.mu_F = 0.0;
    prob.validate();
    return prob;
}

CournotParams benchmark_cournot_params(std::uint64_t seed)
{
    CournotParams p;
    p.firms = 4;
    p.nodes = 3;
    p.alpha = Vector::Constant(3, 50.0);
    p.beta = Vector::Constant(3, 0.05);
    p.caps = Matrix::Constant(4, 3, 120.0);
    p.sigma = 1.01;
    p.cost_slopes.resize(4, 3);
    Rng rng(seed);
    std::uniform_real_distribution<double> slope(10.0, 50.0);
    for (Index i = 0; i < 4; ++i) {
        for (Index j = 0; j < 3; ++j) p.cost_slopes(i, j) = slope(rng);
    }
    return p;
}

ProblemSpec benchmark_cournot_instance(std::uint64_t seed)
{
    auto prob = build_cournot(benchmark_cournot_params(seed));
    prob.id = "benchmark_cournot_seed" + std::to_string(seed);
    return prob;
}

// ---------------------------------------------------------------------------
// Penalized programs
// ---------------------------------------------------------------------------

Vector penalized_map(const Matrix& A, const Vector& b, const std::vector<ConvexConstraint>& h, const Vector& x)
{
    Vector out = Vector::Zero(x.size());
    if (A.rows() > 0) out = A.transpose() * (A * x - b);
    for (const auto& c : h) {
        const double v = c.value(x);
        if (v > 0.0) out += v * c.gradient(x);
    }
    return out;
}

double penalized_potential(const Matrix& A, const Vector& b, const std::vector<ConvexConstraint>& h, const Vector& x)
{
    double phi = A.rows() > 0 ? 0.5 * (A * x - b).squaredNorm() : 0.0;
    for (const auto& c : h) {
        const double v = std::max(0.0, c.value(x));
        phi += 0.5 * v * v;
    }
    return phi;
}

ProblemSpec build_penalized_program(const Matrix& A, const Vector& b, std::vector<ConvexConstraint> h,
                                    StructurePtr structure, std::vector<SetDescriptor> sets)
{
    if (A.rows() != b.size()) throw std::invalid_argument("penalized program: A and b sizes differ");
    const Index n = structure ? structure->dim() : A.cols();
    if (A.rows() > 0 && A.cols() != n) throw std::invalid_argument("penalized program: A has wrong column count");

    ProblemSpec prob;
    prob.id = "penalized_program";
    prob.structure = make_structure(std::move(structure), n);
    prob.sets = std::move(sets);
    auto data = std::make_shared<const std::tuple<Matrix, Vector, std::vector<ConvexConstraint>>>(A, b, std::move(h));
    auto st = prob.structure;
    prob.map_block = [data, st](const Vector& x, std::size_t i, Eigen::Ref<Vector> out) {
        const auto& [Am, bv, hs] = *data;
        out = st->segment(penalized_map(Am, bv, hs, x), i);
    };
    prob.objective = [](const Vector&) { return 0.0; };
    prob.subgrad_block = [](const Vector&, std::size_t, Eigen::Ref<Vector> out) { out.setZero(); };
    prob.constants.mu_f = 0.0;
    prob.constants.mu_F = 0.0;
    if (std::get<2>(*data).empty()) prob.constants.L_F = A.rows() > 0 ? std::pow(spectral_norm(A), 2) : 0.0;
    prob.validate();
    return prob;
}

// ---------------------------------------------------------------------------
// Complementarity
// ---------------------------------------------------------------------------

ProblemSpec build_lcp(FullMap F, Index n, StructurePtr structure)
{
    ProblemSpec prob;
    prob.id = "lcp";
    prob.structure = make_structure(std::move(structure), n);
    for (std::size_t i = 0; i < prob.structure->num_blocks(); ++i) {
        prob.sets.push_back(SetDescriptor::nonneg_orthant(prob.structure->block_dim(i)));
    }
    auto st = prob.structure;
    auto map = std::make_shared<const FullMap>(std::move(F));
    prob.map_block = [map, st](const Vector& x, std::size_t i, Eigen::Ref<Vector> out) {
        out = st->segment((*map)(x), i);
    };
    prob.objective = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
    prob.subgrad_block = [st](const Vector& x, std::size_t i, Eigen::Ref<Vector> out) { out = st->segment(x, i); };
    prob.constants.mu_f = 1.0;
    prob.constants.L_f = 1.0;
    prob.validate();
    return prob;
}

Vector AffineLcp::one_solution(const Matrix& Q, const Vector& q, double tol)
{
    const Index n = q.size();
    if (Q.rows() != n || Q.cols() != n) throw std::invalid_argument("AffineLcp: Q must be n x n");
    if (n > 20) throw std::invalid_argument("AffineLcp: enumeration limited to n <= 20");
    const double scale = 1.0 + Q.cwiseAbs().maxCoeff() + q.cwiseAbs().maxCoeff();

    // Every optimal face of min_{x>=0} 0.5 x^T Q x + q^T x contains a stationary
    // point with nonnegative minimum-norm representation on some support.
    Vector best;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        const auto support = indices_of(mask, n, true);
        Vector x = Vector::Zero(n);
        if (!support.empty()) {
            const auto k = static_cast<Index>(support.size());
            Matrix Qs(k, k);
            Vector qs(k);
            for (Index a = 0; a < k; ++a) {
                qs[a] = q[support[a]];
                for (Index c = 0; c < k; ++c) Qs(a, c) = Q(support[a], support[c]);
            }
            Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Qs);
            const Vector xs = cod.solve(-qs);
            if ((Qs * xs + qs).cwiseAbs().maxCoeff() > tol * scale) continue;
            if (xs.minCoeff() < -tol * scale) continue;
            for (Index a = 0; a < k; ++a) x[support[a]] = std::max(xs[a], 0.0);
        }
        const double value = 0.5 * x.dot(Q * x) + q.dot(x);
        if (value < best_value) {
            best_value = value;
            best = x;
        }
    }
    if (best.size() == 0 || (Q * best + q).minCoeff() < -tol * scale * 10.0) {
        throw std::runtime_error("AffineLcp: no complementarity solution found");
    }
    return best;
}

Vector AffineLcp::select(const Matrix& Q, const Vector& q, const Vector& c, double tol)
{
    const Index n = q.size();
    const Vector xhat = one_solution(Q, q, tol);
    Matrix E(n + 1, n);
    E.topRows(n) = Q;
    E.row(n) = q.transpose();
    const Vector e = E * xhat;
    const double scale = 1.0 + E.cwiseAbs().maxCoeff() * (1.0 + xhat.cwiseAbs().maxCoeff());

    // The minimizer is the projection of c onto {Ex = e, x_Z = 0} for its own
    // zero set Z, so the closest feasible candidate over all Z is exact.
    Vector best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        const auto free = indices_of(mask, n, true);
        Vector x = Vector::Zero(n);
        if (!free.empty()) {
            const auto k = static_cast<Index>(free.size());
            Matrix Ef(n + 1, k);
            Vector cf(k);
            for (Index a = 0; a < k; ++a) {
                Ef.col(a) = E.col(free[a]);
                cf[a] = c[free[a]];
            }
            // minimum-norm correction lies in the row space of Ef: orthogonal projection
            Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Ef);
            const Vector xf = cf + cod.solve(e - Ef * cf);
            if ((Ef * xf - e).cwiseAbs().maxCoeff() > tol * scale) continue;
            if (xf.minCoeff() < -tol * scale) continue;
            for (Index a = 0; a < k; ++a) x[free[a]] = std::max(xf[a], 0.0);
        } else if (e.cwiseAbs().maxCoeff() > tol * scale) {
            continue;
        }
        const double dist = (x - c).squaredNorm();
        if (dist < best_dist) {
            best_dist = dist;
            best = x;
        }
    }
    if (best.size() == 0) throw std::runtime_error("AffineLcp: selection failed");
    return best;
}

// ---------------------------------------------------------------------------
// l1 over an affine slice of a box
// ---------------------------------------------------------------------------

L1Reference l1_affine_box_reference(const Matrix& A, const Vector& b, const Vector& lower, const Vector& upper)
{
    const Index m = A.rows();
    const Index n = A.cols();
    if (b.size() != m || lower.size() != n || upper.size() != n) {
        throw std::invalid_argument("l1 reference: dimension mismatch");
    }
    if (!lower.allFinite() || !upper.allFinite()) throw std::invalid_argument("l1 reference: box must be bounded");
    if (n > 24) throw std::invalid_argument("l1 reference: enumeration limited to n <= 24");
    Eigen::FullPivLU<Matrix> rank_check(A);
    if (rank_check.rank() != m) throw std::invalid_argument("l1 reference: A must have full row rank");

    const double tol = 1e-9 * (1.0 + upper.cwiseAbs().maxCoeff() + lower.cwiseAbs().maxCoeff());
    L1Reference best{std::numeric_limits<double>::infinity(), Vector()};

    // A vertex of {Ax = b, box, sign orthant} fixes n - m coordinates at a
    // bound or at zero and solves the remaining m x m system.
    std::vector<std::vector<double>> choices(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        auto& ch = choices[static_cast<std::size_t>(i)];
        ch.push_back(lower[i]);
        if (upper[i] != lower[i]) ch.push_back(upper[i]);
        if (lower[i] < 0.0 && upper[i] > 0.0) ch.push_back(0.0);
    }

    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        if (std::popcount(mask) != static_cast<int>(n - m)) continue;
        const auto fixed = indices_of(mask, n, true);
        const auto basic = indices_of(mask, n, false);
        Matrix B(m, m);
        for (Index a = 0; a < m; ++a) B.col(a) = A.col(basic[a]);
        Eigen::FullPivLU<Matrix> lu(B);
        if (m > 0 && !lu.isInvertible()) continue;

        std::vector<std::size_t> pick(fixed.size(), 0);
        while (true) {
            Vector x = Vector::Zero(n);
            Vector rhs = b;
            for (std::size_t t = 0; t < fixed.size(); ++t) {
                const double v = choices[static_cast<std::size_t>(fixed[t])][pick[t]];
                x[fixed[t]] = v;
                rhs -= A.col(fixed[t]) * v;
            }
            bool ok = true;
            if (m > 0) {
                const Vector xb = lu.solve(rhs);
                for (Index a = 0; a < m; ++a) {
                    if (xb[a] < lower[basic[a]] - tol || xb[a] > upper[basic[a]] + tol) {
                        ok = false;
                        break;
                    }
                    x[basic[a]] = std::clamp(xb[a], lower[basic[a]], upper[basic[a]]);
                }
            }
            if (ok) {
                const double value = x.lpNorm<1>();
                if (value < best.value) best = {value, x};
            }
            // odometer over the fixed coordinates' candidate values
            std::size_t t = 0;
            for (; t < fixed.size(); ++t) {
                if (++pick[t] < choices[static_cast<std::size_t>(fixed[t])].size()) break;
                pick[t] = 0;
            }
            if (t == fixed.size()) break;
        }
    }
    if (best.solution.size() == 0) throw std::invalid_argument("l1 reference: {Ax = b} does not meet the box");
    return best;
}

ProblemSpec build_l1_over_affine_box(const Matrix& A, const Vector& b, const Vector& lower, const Vector& upper,
                                     StructurePtr structure)
{
    const Index n = A.cols();
    if (!lower.allFinite() || !upper.allFinite()) throw std::invalid_argument("l1 over affine box: box must be bounded");
    const auto reference = l1_affine_box_reference(A, b, lower, upper);

    ProblemSpec prob;
    prob.id = "l1_affine_box_n" + std::to_string(n);
    prob.structure = make_structure(std::move(structure), n);
    for (std::size_t i = 0; i < prob.structure->num_blocks(); ++i) {
        const Index off = prob.structure->offset(i);
        const Index nb = prob.structure->block_dim(i);
        prob.sets.push_back(SetDescriptor::box(lower.segment(off, nb), upper.segment(off, nb)));
    }
    auto data = std::make_shared<const std::pair<Matrix, Vector>>(A, b);
    auto st = prob.structure;
    prob.map_block = [data, st](const Vector& x, std::size_t i, Eigen::Ref<Vector> out) {
        const auto& [Am, bv] = *data;
        out.noalias() = Am.middleCols(st->offset(i), st->block_dim(i)).transpose() * (Am * x - bv);
    };
    prob.map_vjp = [data](const Vector&, const Vector& v, Eigen::Ref<Vector> out) {
        const auto& Am = data->first;
        out.noalias() = Am.transpose() * (Am * v);
    };
    prob.objective = [](const Vector& x) { return x.lpNorm<1>(); };
    prob.subgrad_block = [st](const Vector& x, std::size_t i, Eigen::Ref<Vector> out) {
        const auto seg = st->segment(x, i);
        for (Index t = 0; t < seg.size(); ++t) out[t] = seg[t] > 0.0 ? 1.0 : (seg[t] < 0.0 ? -1.0 : 0.0);
    };
    prob.constants.M = prob.max_norm();
    prob.constants.C_f = std::sqrt(static_cast<double>(n));
    prob.constants.C_F = max_affine_residual_norm_on_box(A, b, lower, upper);
    prob.constants.L_F = std::pow(spectral_norm(A), 2);
    prob.constants.mu_F = 0.0;
    prob.known_solution = reference.solution;
    prob.known_optimal_value = reference.value;
    prob.validate();
    return prob;
}

// ---------------------------------------------------------------------------
// Affine map with a quadratic selection objective
// ---------------------------------------------------------------------------

ProblemSpec build_affine_quadratic(const Matrix& Q, const Vector& q, const Vector& c, StructurePtr structure,
                                   std::vector<SetDescriptor> sets)
{
    const Index n = q.size();
    if (Q.rows() != n || Q.cols() != n || c.size() != n) throw std::invalid_argument("affine quadratic: dimension mismatch");
    ProblemSpec prob;
    prob.id = "affine_quadratic_n" + std::to_string(n);
    prob.structure = make_structure(std::move(structure), n);
    prob.sets = std::move(sets);
    auto data = std::make_shared<const std::tuple<Matrix, Vector, Vector>>(Q, q, c);
    auto st = prob.structure;
    prob.map_block = [data, st](const Vector& x, std::size_t i, Eigen::Ref<Vector> out) {
        const auto& [Qm, qv, cv] = *data;
        const Index off = st->offset(i);
        const Index nb = st->block_dim(i);
        out.noalias() = Qm.middleRows(off, nb) * x;
        out += qv.segment(off, nb);
    };
    prob.map_vjp = [data](const Vector&, const Vector& v, Eigen::Ref<Vector> out) {
        out.noalias() = std::get<0>(*data).transpose() * v;
    };
    prob.objective = [data](const Vector& x) { return 0.5 * (x - std::get<2>(*data)).squaredNorm(); };
    prob.subgrad_block = [data, st](const Vector& x, std::size_t i, Eigen::Ref<Vector> out) {
        out = st->segment(x, i) - st->segment(std::get<2>(*data), i);
    };
    prob.constants.L_F = spectral_norm(Q);
    if (n > 0) {
        const Matrix sym = 0.5 * (Q + Q.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
        prob.constants.mu_F = std::max(0.0, eig.eigenvalues().minCoeff());
    }
    prob.constants.mu_f = 1.0;
    prob.constants.L_f = 1.0;
    prob.validate();
    if (prob.bounded()) {
        const double M = prob.max_norm();
        prob.constants.M = M;
        prob.constants.C_F = spectral_norm(Q) * M + q.norm();
        prob.constants.C_f = M + c.norm();
    }
    return prob;
}

ProblemSpec build_strongly_convex_unbounded(const Matrix& Q, const Vector& q, const Vector& c, StructurePtr structure)
{
    const Index n = q.size();
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + Q.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("strongly convex unbounded: Q must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Q);
    if (n > 0 && eig.eigenvalues().minCoeff() < -1e-10 * (1.0 + eig.eigenvalues().cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("strongly convex unbounded: Q must be positive semidefinite");
    }
    structure = make_structure(std::move(structure), n);
    std::vector<SetDescriptor> sets;
    for (std::size_t i = 0; i < structure->num_blocks(); ++i) {
        sets.push_back(SetDescriptor::nonneg_orthant(structure->block_dim(i)));
    }
    auto prob = build_affine_quadratic(Q, q, c, structure, std::move(sets));
    prob.id = "strongly_convex_unbounded_n" + std::to_string(n);
    prob.known_solution = AffineLcp::select(Q, q, c);
    prob.known_optimal_value = prob.f(*prob.known_solution);
    return prob;
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

ProblemSpec synthetic_l1_instance(const SyntheticL1Params& p)
{
    if (p.n < 1 || p.m < 1 || p.m > p.n) throw std::invalid_argument("synthetic l1: need 1 <= m <= n");
    if (p.blocks < 1 || p.n % static_cast<Index>(p.blocks) != 0) {
        throw std::invalid_argument("synthetic l1: block count must divide n");
    }
    if (!(p.box > 0.0) || !(p.target_scale >= 0.0) || p.target_scale > p.box) {
        throw std::invalid_argument("synthetic l1: need 0 <= target_scale <= box");
    }
    Rng rng(p.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(-p.target_scale, p.target_scale);
    Matrix A(p.m, p.n);
    for (Index i = 0; i < p.m; ++i)
        for (Index j = 0; j < p.n; ++j) A(i, j) = normal(rng);
    Vector xhat(p.n);
    for (Index j = 0; j < p.n; ++j) xhat[j] = unif(rng);
    const Vector b = A * xhat;
    auto st = std::make_shared<const BlockStructure>(
        BlockStructure::uniform(p.blocks, p.n / static_cast<Index>(p.blocks)));
    auto prob = build_l1_over_affine_box(A, b, Vector::Constant(p.n, -p.box), Vector::Constant(p.n, p.box), st);
    prob.id = "l1_affine_box_n" + std::to_string(p.n) + "_m" + std::to_string(p.m) + "_seed" + std::to_string(p.seed);
    return prob;
}

ProblemSpec synthetic_unbounded_instance(const SyntheticUnboundedParams& p)
{
    if (p.n < 1) throw std::invalid_argument("synthetic unbounded: n must be positive");
    if (p.blocks < 1 || p.n % static_cast<Index>(p.blocks) != 0) {
        throw std::invalid_argument("synthetic unbounded: block count must divide n");
    }
    Rng rng(p.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix G(p.n, p.n);
    for (Index i = 0; i < p.n; ++i)
        for (Index j = 0; j < p.n; ++j) G(i, j) = normal(rng);
    const Matrix Q = Matrix::Identity(p.n, p.n) + p.coupling * p.coupling * G.transpose() * G;
    Vector xhat = Vector::Zero(p.n);
    Vector slack = Vector::Zero(p.n);
    for (Index j = 0; j < p.n; ++j) {
        if (unif(rng) < 0.6) {
            xhat[j] = 0.2 + 1.8 * unif(rng);
        } else {
            slack[j] = 0.2 + 0.8 * unif(rng);
        }
    }
    const Vector q = slack - Q * xhat;
    Vector c(p.n);
    for (Index j = 0; j < p.n; ++j) c[j] = xhat[j] + 0.5 * normal(rng);
    auto st = std::make_shared<const BlockStructure>(
        BlockStructure::uniform(p.blocks, p.n / static_cast<Index>(p.blocks)));
    auto prob = build_strongly_convex_unbounded(Q, q, c, st);
    prob.id = "strongly_convex_unbounded_n" + std::to_string(p.n) + "_seed" + std::to_string(p.seed);
    return prob;
}

} // namespace arbirg
