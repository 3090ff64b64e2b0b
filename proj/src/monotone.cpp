#include "gn3/monotone.hpp"

#include "gn3/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gn3 {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Resolvent output for the logarithmic graph stays this far inside (-1, 1).
constexpr double kLogEdge = 1e-14;
constexpr double kRootTol = 1e-12;
constexpr int kRootMaxIter = 200;

double log_gamma(const Logarithmic& p, double r) { return p.kappa1 * std::log((1.0 + r) / (1.0 - r)); }
double log_gamma_prime(const Logarithmic& p, double r) { return 2.0 * p.kappa1 / ((1.0 - r) * (1.0 + r)); }

// Solves r + eps*gamma(r) = s for an increasing gamma on [a, b] with
// F(a) <= 0 <= F(b). Newton steps that leave the bracket are replaced by
// bisection.
template <class Gamma, class GammaPrime>
double monotone_root(double s, double eps, double a, double b, Gamma gamma, GammaPrime gamma_prime) {
    auto F = [&](double r) { return r + eps * gamma(r) - s; };
    const double lo = a, hi = b;
    // Walk to the neighbouring double with the smallest residual.
    auto polish = [&](double x) {
        double fx = std::abs(F(x));
        for (double dir : {-1.0, 1.0}) {
            for (int k = 0; k < 8; ++k) {
                const double y = std::nextafter(x, dir * std::numeric_limits<double>::infinity());
                if (y < lo || y > hi) break;
                const double fy = std::abs(F(y));
                if (!(fy < fx)) break;
                x = y;
                fx = fy;
            }
        }
        return x;
    };
    double r = std::clamp(s, a, b);
    for (int it = 0; it < kRootMaxIter; ++it) {
        const double fr = F(r);
        if (fr == 0.0) return r;
        if (fr < 0.0) a = r; else b = r;
        const double dfr = 1.0 + eps * gamma_prime(r);
        double next = r - fr / dfr;
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        // Iterate to a few ulps of the root: the residual of r + eps*gamma(r) = s
        // is the step size times 1 + eps*gamma'(r), which is huge near a singularity.
        const double ulps = 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(next), 1e-300);
        if (std::abs(next - r) <= ulps || b - a <= ulps) return polish(next);
        r = next;
    }
    if (std::abs(F(r)) <= kRootTol * (1.0 + std::abs(s))) return r;
    std::ostringstream os;
    os << "resolvent root find did not converge for s=" << s << " eps=" << eps;
    throw NumericalFailure(os.str());
}

}  // namespace

bool Interval::contains(double s) const noexcept {
    const bool above = lo_closed ? s >= lo : s > lo;
    const bool below = hi_closed ? s <= hi : s < hi;
    return above && below;
}

GraphSpec::GraphSpec(Kind kind) : kind_(kind) {
    std::visit(overloaded{
                   [](const DoubleObstacle& p) {
                       if (!(p.lo < p.hi)) throw InvalidArgument("double obstacle requires lo < hi");
                       if (!(p.lo <= 0.0 && 0.0 <= p.hi))
                           throw InvalidArgument("double obstacle requires lo <= 0 <= hi so that 0 is in gamma(0)");
                   },
                   [](const Logarithmic& p) {
                       if (!(p.kappa1 > 0.0 && p.kappa1 < p.kappa0))
                           throw InvalidArgument("logarithmic graph requires 0 < kappa1 < kappa0");
                   },
                   [](const DoubleWell& p) {
                       if (!(p.kappa > 0.0)) throw InvalidArgument("double well requires kappa > 0");
                   },
               },
               kind_);
}

std::string GraphSpec::name() const {
    return std::visit(overloaded{
                          [](const DoubleObstacle&) { return std::string("double_obstacle"); },
                          [](const Logarithmic&) { return std::string("logarithmic"); },
                          [](const DoubleWell&) { return std::string("double_well"); },
                      },
                      kind_);
}

Interval GraphSpec::domain() const noexcept {
    return std::visit(overloaded{
                          [](const DoubleObstacle& p) { return Interval{p.lo, p.hi, true, true}; },
                          [](const Logarithmic&) { return Interval{-1.0, 1.0, false, false}; },
                          [](const DoubleWell&) { return Interval{-kInfinity, kInfinity, false, false}; },
                      },
                      kind_);
}

bool GraphSpec::single_valued() const noexcept { return !std::holds_alternative<DoubleObstacle>(kind_); }

bool GraphSpec::smooth() const noexcept { return std::holds_alternative<DoubleWell>(kind_); }

double potential(const GraphSpec& spec, double s) {
    return std::visit(overloaded{
                          [s](const DoubleObstacle& p) { return (s >= p.lo && s <= p.hi) ? 0.0 : kInfinity; },
                          [s](const Logarithmic& p) {
                              if (std::abs(s) > 1.0) return kInfinity;
                              auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
                              return p.kappa1 * (xlogx(1.0 + s) + xlogx(1.0 - s));
                          },
                          [s](const DoubleWell& p) { return 0.25 * p.kappa * s * s * s * s; },
                      },
                      spec.kind());
}

double resolvent(const GraphSpec& spec, double eps, double s) {
    if (!(eps > 0.0)) throw InvalidArgument("resolvent requires eps > 0");
    if (s == 0.0) return 0.0;
    return std::visit(
        overloaded{
            [s](const DoubleObstacle& p) { return std::clamp(s, p.lo, p.hi); },
            [s, eps](const Logarithmic& p) {
                const double edge = 1.0 - kLogEdge;
                const double a = s > 0.0 ? 0.0 : -edge;
                const double b = s > 0.0 ? edge : 0.0;
                auto F = [&](double r) { return r + eps * log_gamma(p, r) - s; };
                // The root lies beyond the clamp band when F keeps its sign at the edge.
                if (s > 0.0 && F(b) <= 0.0) return b;
                if (s < 0.0 && F(a) >= 0.0) return a;
                return monotone_root(
                    s, eps, a, b, [&](double r) { return log_gamma(p, r); },
                    [&](double r) { return log_gamma_prime(p, r); });
            },
            [s, eps](const DoubleWell& p) {
                const double a = std::min(0.0, s);
                const double b = std::max(0.0, s);
                return monotone_root(
                    s, eps, a, b, [&](double r) { return p.kappa * r * r * r; },
                    [&](double r) { return 3.0 * p.kappa * r * r; });
            },
        },
        spec.kind());
}

double yosida(const GraphSpec& spec, double eps, double s) { return (s - resolvent(spec, eps, s)) / eps; }

double yosida_derivative(const GraphSpec& spec, double eps, double s) {
    if (!(eps > 0.0)) throw InvalidArgument("yosida_derivative requires eps > 0");
    return std::visit(overloaded{
                          [s, eps](const DoubleObstacle& p) { return (s > p.hi || s < p.lo) ? 1.0 / eps : 0.0; },
                          [&spec, s, eps](const Logarithmic& p) {
                              const double r = resolvent(spec, eps, s);
                              if (std::abs(r) >= 1.0 - kLogEdge) return 1.0 / eps;
                              const double d = log_gamma_prime(p, r);
                              return d / (1.0 + eps * d);
                          },
                          [&spec, s, eps](const DoubleWell& p) {
                              const double r = resolvent(spec, eps, s);
                              const double d = 3.0 * p.kappa * r * r;
                              return d / (1.0 + eps * d);
                          },
                      },
                      spec.kind());
}

double moreau(const GraphSpec& spec, double eps, double s) {
    const double r = resolvent(spec, eps, s);
    return (s - r) * (s - r) / (2.0 * eps) + potential(spec, r);
}

double minimal_section(const GraphSpec& spec, double s) {
    if (!spec.domain().contains(s)) {
        std::ostringstream os;
        os << "minimal_section: s=" << s << " is outside D(gamma) of " << spec.name();
        throw DomainError(os.str());
    }
    return std::visit(overloaded{
                          // 0 belongs to gamma(s) on the whole closed interval.
                          [](const DoubleObstacle&) { return 0.0; },
                          [s](const Logarithmic& p) { return log_gamma(p, s); },
                          [s](const DoubleWell& p) { return p.kappa * s * s * s; },
                      },
                      spec.kind());
}

double graph_derivative(const GraphSpec& spec, double s) {
    const auto* dw = std::get_if<DoubleWell>(&spec.kind());
    if (dw == nullptr) throw InvalidArgument("graph_derivative requires a smooth graph, got " + spec.name());
    return 3.0 * dw->kappa * s * s;
}

double local_lipschitz(const GraphSpec& spec, double bound) {
    return graph_derivative(spec, std::abs(bound));
}

CouplingSpec quadratic_coupling(double c, double g0) {
    std::ostringstream os;
    os << "quadratic(c=" << c << ",G0=" << g0 << ")";
    return CouplingSpec{
        os.str(),
        [c](double s) { return -c * s; },
        [c, g0](double s) { return g0 - 0.5 * c * s * s; },
        std::abs(1.0 - c),
    };
}

CouplingSpec natural_coupling(const GraphSpec& graph) {
    return std::visit(overloaded{
                          [](const DoubleObstacle&) { return quadratic_coupling(2.0, 1.0); },
                          [](const Logarithmic& p) { return quadratic_coupling(2.0 * p.kappa0, 0.0); },
                          [](const DoubleWell& p) { return quadratic_coupling(p.kappa, 0.25 * p.kappa); },
                      },
                      graph.kind());
}

}  // namespace gn3
