#include "gn3/grid.hpp"

#include "gn3/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace gn3 {

namespace {

// Thomas elimination; sub[0] and sup[n-1] are ignored.
void thomas(std::span<const double> sub, std::span<const double> main, std::span<const double> sup,
            std::span<const double> rhs, std::span<double> x) {
    const std::size_t n = main.size();
    std::vector<double> c(n);
    std::vector<double> d(n);
    c[0] = sup[0] / main[0];
    d[0] = rhs[0] / main[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double m = main[i] - sub[i] * c[i - 1];
        c[i] = i + 1 < n ? sup[i] / m : 0.0;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        std::ostringstream os;
        os << what << ": size mismatch (" << a << " vs " << b << ")";
        throw InvalidArgument(os.str());
    }
}

}  // namespace

bool Field::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

Field& Field::operator+=(const Field& other) {
    require_same_size(size(), other.size(), "Field +=");
    for (std::size_t i = 0; i < size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Field& Field::operator-=(const Field& other) {
    require_same_size(size(), other.size(), "Field -=");
    for (std::size_t i = 0; i < size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

Field& Field::operator*=(double c) noexcept {
    for (double& v : values_) v *= c;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double c, Field a) { return a *= c; }

SpaceGrid::SpaceGrid(double length, std::size_t n_nodes) : length_(length), n_(n_nodes) {
    if (!(length > 0.0)) throw InvalidArgument("SpaceGrid: length must be positive");
    if (n_nodes < 3) throw InvalidArgument("SpaceGrid: need at least 3 nodes");
    dx_ = length / static_cast<double>(n_ - 1);
    nodes_.resize(n_);
    weights_.assign(n_, dx_);
    for (std::size_t i = 0; i < n_; ++i) nodes_[i] = x(i);
    nodes_.back() = length_;
    weights_.front() = weights_.back() = 0.5 * dx_;
}

Field SpaceGrid::sample(const std::function<double(double)>& fn) const {
    Field out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = fn(nodes_[i]);
    return out;
}

void SpaceGrid::check(const Field& u) const {
    if (u.size() != n_) {
        std::ostringstream os;
        os << "field has " << u.size() << " values, grid has " << n_ << " nodes";
        throw InvalidArgument(os.str());
    }
    if (!u.all_finite()) throw InvalidArgument("field has non-finite values");
}

double inner(const SpaceGrid& grid, std::span<const double> u, std::span<const double> v) {
    require_same_size(u.size(), grid.size(), "inner");
    require_same_size(v.size(), grid.size(), "inner");
    const auto w = grid.weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * u[i] * v[i];
    return s;
}

double inner(const SpaceGrid& grid, const Field& u, const Field& v) { return inner(grid, u.span(), v.span()); }

double mean(const SpaceGrid& grid, const Field& u) {
    grid.check(u);
    const auto w = grid.weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * u[i];
    return s / grid.length();
}

void apply_laplacian(const SpaceGrid& grid, std::span<const double> u, std::span<double> out) {
    const std::size_t n = grid.size();
    require_same_size(u.size(), n, "laplacian");
    require_same_size(out.size(), n, "laplacian");
    const double inv = 1.0 / (grid.dx() * grid.dx());
    out[0] = 2.0 * (u[1] - u[0]) * inv;
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv;
    out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) * inv;
}

Field laplacian_neumann(const SpaceGrid& grid, const Field& u) {
    Field out(grid.size());
    apply_laplacian(grid, u.span(), out.span());
    return out;
}

void solve_shifted(const SpaceGrid& grid, std::span<const double> diag, double b, std::span<const double> rhs,
                   std::span<double> z) {
    const std::size_t n = grid.size();
    require_same_size(diag.size(), n, "solve_shifted");
    require_same_size(rhs.size(), n, "solve_shifted");
    require_same_size(z.size(), n, "solve_shifted");
    if (!(b >= 0.0)) throw InvalidArgument("solve_shifted: diffusion coefficient must be nonnegative");
    const double c = b / (grid.dx() * grid.dx());
    std::vector<double> sub(n, -c);
    std::vector<double> sup(n, -c);
    std::vector<double> main(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(diag[i] > 0.0)) throw InvalidArgument("solve_shifted: diagonal shift must be positive");
        main[i] = diag[i] + 2.0 * c;
    }
    sup[0] = -2.0 * c;
    sub[n - 1] = -2.0 * c;
    thomas(sub, main, sup, rhs, z);
}

Field solve_helmholtz(const SpaceGrid& grid, double a, double b, const Field& rhs) {
    grid.check(rhs);
    if (!(a >= 0.0)) throw InvalidArgument("solve_helmholtz: a must be nonnegative");
    if (!(b > 0.0)) throw InvalidArgument("solve_helmholtz: b must be positive");
    const std::size_t n = grid.size();
    Field z(n);
    if (a > 0.0) {
        const std::vector<double> diag(n, a);
        solve_shifted(grid, diag, b, rhs.span(), z.span());
        return z;
    }

    // Pure Neumann problem: solvable only for mean-free data; the kernel is the constants.
    const double rhs_mean = mean(grid, rhs);
    if (std::abs(rhs_mean) > 1e-10 * std::max(1.0, rhs.max_abs())) {
        std::ostringstream os;
        os << "solve_helmholtz: a = 0 needs mean-free rhs, got mean " << rhs_mean;
        throw IncompatibleData(os.str());
    }
    // Drop the last equation and pin z[n-1] = 0; the dropped row holds by compatibility.
    const double c = b / (grid.dx() * grid.dx());
    const std::size_t m = n - 1;
    std::vector<double> sub(m, -c);
    std::vector<double> sup(m, -c);
    std::vector<double> main(m, 2.0 * c);
    sup[0] = -2.0 * c;
    thomas(sub, main, sup, rhs.span().first(m), z.span().first(m));
    z[n - 1] = 0.0;
    const double z_mean = mean(grid, z);
    for (double& v : z) v -= z_mean;
    return z;
}

Field cumulative_time_integral(const SpaceGrid& grid, std::span<const Field> history, double tau) {
    if (!(tau > 0.0)) throw InvalidArgument("cumulative_time_integral: tau must be positive");
    Field acc = grid.zeros();
    for (const Field& u : history) {
        grid.check(u);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += tau * u[i];
    }
    return acc;
}

}  // namespace gn3
