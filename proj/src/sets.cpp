#include "arbirg/sets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace arbirg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double balance_residual(const Vector& caps, const Vector& y0, const Vector& s0, double lambda)
{
    double g = 0.0;
    for (Index j = 0; j < caps.size(); ++j) {
        g += std::clamp(y0[j] - lambda, 0.0, caps[j]);
        g -= std::max(s0[j] + lambda, 0.0);
    }
    return g;
}

} // namespace

SetDescriptor SetDescriptor::box(Vector lower, Vector upper)
{
    if (lower.size() != upper.size()) {
        throw std::invalid_argument("Box: bound vectors differ in length");
    }
    for (Index i = 0; i < lower.size(); ++i) {
        if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i]) {
            throw std::invalid_argument("Box: lower bound exceeds upper bound");
        }
    }
    const auto n = lower.size();
    return SetDescriptor(Box{std::move(lower), std::move(upper)}, n);
}

SetDescriptor SetDescriptor::box(Index dim, double lower, double upper)
{
    return box(Vector::Constant(dim, lower), Vector::Constant(dim, upper));
}

SetDescriptor SetDescriptor::nonneg_orthant(Index dim)
{
    return SetDescriptor(NonnegOrthant{}, dim);
}

SetDescriptor SetDescriptor::whole_space(Index dim)
{
    return SetDescriptor(WholeSpace{}, dim);
}

SetDescriptor SetDescriptor::ball(Vector center, double radius)
{
    if (!(radius > 0.0)) {
        throw std::invalid_argument("Ball: radius must be positive");
    }
    const auto n = center.size();
    return SetDescriptor(Ball{std::move(center), radius}, n);
}

SetDescriptor SetDescriptor::balanced_box(Vector caps)
{
    if (caps.size() < 1) {
        throw std::invalid_argument("BalancedBox: at least one node is required");
    }
    for (Index j = 0; j < caps.size(); ++j) {
        if (!(caps[j] > 0.0) || !std::isfinite(caps[j])) {
            throw std::invalid_argument("BalancedBox: caps must be positive and finite");
        }
    }
    const auto n = 2 * caps.size();
    return SetDescriptor(BalancedBox{std::move(caps)}, n);
}

bool SetDescriptor::bounded() const
{
    return std::visit(overloaded{
                          [](const Box& b) { return b.lower.allFinite() && b.upper.allFinite(); },
                          [](const NonnegOrthant&) { return false; },
                          [](const WholeSpace&) { return false; },
                          [](const Ball&) { return true; },
                          [](const BalancedBox&) { return true; },
                      },
                      kind_);
}

std::string SetDescriptor::name() const
{
    return std::visit(overloaded{
                          [](const Box&) { return std::string("box"); },
                          [](const NonnegOrthant&) { return std::string("nonneg"); },
                          [](const WholeSpace&) { return std::string("whole"); },
                          [](const Ball&) { return std::string("ball"); },
                          [](const BalancedBox&) { return std::string("balanced"); },
                      },
                      kind_);
}

double SetDescriptor::max_norm() const
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    return std::visit(overloaded{
                          [](const Box& b) {
                              if (!b.lower.allFinite() || !b.upper.allFinite()) return inf;
                              return std::sqrt(b.lower.cwiseAbs().cwiseMax(b.upper.cwiseAbs()).squaredNorm());
                          },
                          [](const NonnegOrthant&) { return inf; },
                          [](const WholeSpace&) { return inf; },
                          [](const Ball& b) { return b.center.norm() + b.radius; },
                          [](const BalancedBox& b) {
                              // y_j <= B_j and ||s|| <= sum s = sum y <= sum B
                              const double total = b.caps.sum();
                              return std::sqrt(b.caps.squaredNorm() + total * total);
                          },
                      },
                      kind_);
}

std::pair<Vector, Vector> project_balanced(const Vector& caps, const Vector& y0, const Vector& s0)
{
    const Index J = caps.size();
    if (y0.size() != J || s0.size() != J) {
        throw std::invalid_argument("project_balanced: dimension mismatch");
    }

    std::vector<double> breaks;
    breaks.reserve(static_cast<std::size_t>(3 * J));
    for (Index j = 0; j < J; ++j) {
        breaks.push_back(y0[j]);
        breaks.push_back(y0[j] - caps[j]);
        breaks.push_back(-s0[j]);
    }
    std::sort(breaks.begin(), breaks.end());

    // g is positive (= sum caps) left of every breakpoint and has slope -J
    // right of every breakpoint.
    double lambda = 0.0;
    double g_prev = balance_residual(caps, y0, s0, breaks.front());
    if (g_prev <= 0.0) {
        lambda = breaks.front();
    } else {
        bool found = false;
        for (std::size_t t = 1; t < breaks.size(); ++t) {
            const double g_cur = balance_residual(caps, y0, s0, breaks[t]);
            if (g_cur <= 0.0) {
                const double width = breaks[t] - breaks[t - 1];
                const double drop = g_prev - g_cur;
                lambda = drop > 0.0 ? breaks[t - 1] + width * (g_prev / drop) : breaks[t];
                found = true;
                break;
            }
            g_prev = g_cur;
        }
        if (!found) {
            lambda = breaks.back() + g_prev / static_cast<double>(J);
        }
    }

    Vector y(J), s(J);
    for (Index j = 0; j < J; ++j) {
        y[j] = std::clamp(y0[j] - lambda, 0.0, caps[j]);
        s[j] = std::max(s0[j] + lambda, 0.0);
    }
    return {std::move(y), std::move(s)};
}

void project_inplace(const SetDescriptor& set, Eigen::Ref<Vector> v)
{
    if (v.size() != set.dim()) {
        throw std::invalid_argument("project: dimension mismatch");
    }
    std::visit(overloaded{
                   [&](const Box& b) { v = v.cwiseMax(b.lower).cwiseMin(b.upper); },
                   [&](const NonnegOrthant&) { v = v.cwiseMax(0.0); },
                   [&](const WholeSpace&) {},
                   [&](const Ball& b) {
                       const double dist = (v - b.center).norm();
                       if (dist > b.radius) {
                           v = b.center + (b.radius / dist) * (v - b.center);
                       }
                   },
                   [&](const BalancedBox& b) {
                       const Index J = b.caps.size();
                       auto [y, s] = project_balanced(b.caps, v.head(J), v.tail(J));
                       v.head(J) = y;
                       v.tail(J) = s;
                   },
               },
               set.kind());
}

Vector project(const SetDescriptor& set, const Vector& v)
{
    Vector out = v;
    project_inplace(set, out);
    return out;
}

bool contains(const SetDescriptor& set, const Vector& v, double tol)
{
    if (v.size() != set.dim()) {
        throw std::invalid_argument("contains: dimension mismatch");
    }
    if (!v.allFinite()) {
        return false;
    }
    return std::visit(overloaded{
                          [&](const Box& b) {
                              return ((b.lower - v).array() <= tol).all() && ((v - b.upper).array() <= tol).all();
                          },
                          [&](const NonnegOrthant&) { return (v.array() >= -tol).all(); },
                          [&](const WholeSpace&) { return true; },
                          [&](const Ball& b) { return (v - b.center).norm() <= b.radius + tol; },
                          [&](const BalancedBox& b) {
                              const Index J = b.caps.size();
                              const auto y = v.head(J);
                              const auto s = v.tail(J);
                              return (y.array() >= -tol).all() && ((y - b.caps).array() <= tol).all()
                                  && (s.array() >= -tol).all() && std::abs(y.sum() - s.sum()) <= tol;
                          },
                      },
                      set.kind());
}

Vector sample_feasible(const SetDescriptor& set, Rng& rng)
{
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    return std::visit(overloaded{
                          [&](const Box& b) -> Vector {
                              if (!set.bounded()) {
                                  throw std::invalid_argument("sample_feasible: unbounded box");
                              }
                              Vector out(b.lower.size());
                              for (Index i = 0; i < out.size(); ++i) {
                                  out[i] = b.lower[i] + (b.upper[i] - b.lower[i]) * unif(rng);
                              }
                              return out;
                          },
                          [&](const NonnegOrthant&) -> Vector {
                              throw std::invalid_argument("sample_feasible: nonnegative orthant is unbounded");
                          },
                          [&](const WholeSpace&) -> Vector {
                              throw std::invalid_argument("sample_feasible: whole space is unbounded");
                          },
                          [&](const Ball& b) -> Vector {
                              const Index n = b.center.size();
                              Vector dir(n);
                              for (Index i = 0; i < n; ++i) dir[i] = normal(rng);
                              const double norm = dir.norm();
                              if (norm == 0.0) return b.center;
                              const double radius = b.radius * std::pow(unif(rng), 1.0 / static_cast<double>(n));
                              return b.center + (radius / norm) * dir;
                          },
                          [&](const BalancedBox& b) -> Vector {
                              const Index J = b.caps.size();
                              const double total = b.caps.sum();
                              Vector y(J), s(J);
                              for (Index j = 0; j < J; ++j) y[j] = b.caps[j] * unif(rng);
                              for (Index j = 0; j < J; ++j) s[j] = total * unif(rng);
                              auto [py, ps] = project_balanced(b.caps, y, s);
                              Vector out(2 * J);
                              out << py, ps;
                              return out;
                          },
                      },
                      set.kind());
}

} // namespace arbirg
