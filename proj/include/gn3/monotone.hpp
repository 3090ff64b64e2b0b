#pragma once

// Maximal monotone graphs on the real line, gamma = d(phi), together with the
// scalar machinery the solver needs: resolvent (I + eps*gamma)^{-1}, Yosida
// approximation gamma_eps, Moreau envelope phi_eps and the minimal section.
//
// A multivalued gamma is never evaluated as a set; callers go through the
// resolvent, the Yosida approximation or the minimal section.

#include <functional>
#include <limits>
#include <string>
#include <variant>

namespace gn3 {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Indicator of [lo, hi]; gamma has vertical branches at both ends.
struct DoubleObstacle {
    double lo = -1.0;
    double hi = 1.0;
    friend bool operator==(const DoubleObstacle&, const DoubleObstacle&) = default;
};

/// phi(u) = kappa1 ((1+u) ln(1+u) + (1-u) ln(1-u)) on [-1, 1].
/// kappa0 only enters the companion coupling gbar(u) = -2 kappa0 u.
struct Logarithmic {
    double kappa0 = 2.0;
    double kappa1 = 1.0;
    friend bool operator==(const Logarithmic&, const Logarithmic&) = default;
};

/// phi(u) = kappa u^4 / 4, gamma(u) = kappa u^3 (the convex part of the quartic well).
struct DoubleWell {
    double kappa = 1.0;
    friend bool operator==(const DoubleWell&, const DoubleWell&) = default;
};

struct Interval {
    double lo;
    double hi;
    bool lo_closed;
    bool hi_closed;

    [[nodiscard]] bool contains(double s) const noexcept;
    [[nodiscard]] bool interior(double s) const noexcept { return s > lo && s < hi; }
};

class GraphSpec {
public:
    using Kind = std::variant<DoubleObstacle, Logarithmic, DoubleWell>;

    /// Throws InvalidArgument when the parameters violate gamma(0) containing 0,
    /// lo < hi, or 0 < kappa1 < kappa0.
    explicit GraphSpec(Kind kind);

    static GraphSpec double_obstacle(double lo = -1.0, double hi = 1.0) { return GraphSpec{DoubleObstacle{lo, hi}}; }
    static GraphSpec logarithmic(double kappa0 = 2.0, double kappa1 = 1.0) { return GraphSpec{Logarithmic{kappa0, kappa1}}; }
    static GraphSpec double_well(double kappa = 1.0) { return GraphSpec{DoubleWell{kappa}}; }

    [[nodiscard]] const Kind& kind() const noexcept { return kind_; }
    [[nodiscard]] std::string name() const;

    /// Effective domain D(gamma).
    [[nodiscard]] Interval domain() const noexcept;

    [[nodiscard]] bool single_valued() const noexcept;
    /// Single valued, defined on all of R and locally Lipschitz.
    [[nodiscard]] bool smooth() const noexcept;

    friend bool operator==(const GraphSpec&, const GraphSpec&) = default;

private:
    Kind kind_;
};

/// phi(s); kInfinity outside the domain of phi.
[[nodiscard]] double potential(const GraphSpec& spec, double s);

/// r = (I + eps*gamma)^{-1}(s). Throws InvalidArgument for eps <= 0 and
/// NumericalFailure if the scalar root find does not converge.
[[nodiscard]] double resolvent(const GraphSpec& spec, double eps, double s);

/// gamma_eps(s) = (s - resolvent(s)) / eps.
[[nodiscard]] double yosida(const GraphSpec& spec, double eps, double s);

/// d/ds gamma_eps(s). For the obstacle the one-sided value on the flat side is
/// returned at the kinks.
[[nodiscard]] double yosida_derivative(const GraphSpec& spec, double eps, double s);

/// phi_eps(s) = |s - r|^2 / (2 eps) + phi(r), r = resolvent(s).
[[nodiscard]] double moreau(const GraphSpec& spec, double eps, double s);

/// gamma^0(s): element of gamma(s) of least modulus. Throws DomainError
/// when s is not in D(gamma).
[[nodiscard]] double minimal_section(const GraphSpec& spec, double s);

/// gamma'(s) for smooth graphs; InvalidArgument otherwise.
[[nodiscard]] double graph_derivative(const GraphSpec& spec, double s);

/// sup of gamma' over [-bound, bound] for smooth graphs.
[[nodiscard]] double local_lipschitz(const GraphSpec& spec, double bound);

/// G, gbar = G' (Lipschitz) and g(s) = gbar(s) + s.
struct CouplingSpec {
    std::string name;
    std::function<double(double)> gbar;
    std::function<double(double)> G;
    double lip_g = 0.0;

    [[nodiscard]] double g(double s) const { return gbar(s) + s; }
};

/// G(s) = g0 - c s^2 / 2, so gbar(s) = -c s and g(s) = (1 - c) s.
[[nodiscard]] CouplingSpec quadratic_coupling(double c, double g0);

/// Coupling that pairs with the graph to form the usual two-well potential:
/// obstacle G = 1 - u^2; double well G = kappa (1 - 2u^2) / 4 (so that
/// phi + G = kappa (u^2 - 1)^2 / 4); logarithmic G = -kappa0 u^2.
[[nodiscard]] CouplingSpec natural_coupling(const GraphSpec& graph);

}  // namespace gn3
