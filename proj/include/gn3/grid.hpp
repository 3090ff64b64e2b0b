#pragma once

// Uniform 1-D grid on (0, L) with ghost-point Neumann closure and trapezoid
// quadrature. The quadrature weights make the discrete Laplacian self-adjoint:
// <lap u, v>_w = <u, lap v>_w, and sum_i w_i (lap u)_i = 0.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace gn3 {

/// Nodal samples of a grid function.
class Field {
public:
    Field() = default;
    explicit Field(std::size_t n, double value = 0.0) : values_(n, value) {}
    explicit Field(std::vector<double> values) : values_(std::move(values)) {}
    Field(std::initializer_list<double> values) : values_(values) {}

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double& operator[](std::size_t i) noexcept { return values_[i]; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }

    [[nodiscard]] std::span<double> span() noexcept { return values_; }
    [[nodiscard]] std::span<const double> span() const noexcept { return values_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    auto begin() noexcept { return values_.begin(); }
    auto end() noexcept { return values_.end(); }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    [[nodiscard]] bool all_finite() const noexcept;
    [[nodiscard]] double max_abs() const noexcept;

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(double c) noexcept;

    friend bool operator==(const Field&, const Field&) = default;

private:
    std::vector<double> values_;
};

[[nodiscard]] Field operator+(Field a, const Field& b);
[[nodiscard]] Field operator-(Field a, const Field& b);
[[nodiscard]] Field operator*(double c, Field a);

class SpaceGrid {
public:
    /// Throws InvalidArgument unless length > 0 and n_nodes >= 3.
    SpaceGrid(double length, std::size_t n_nodes);

    [[nodiscard]] double length() const noexcept { return length_; }
    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] double dx() const noexcept { return dx_; }
    [[nodiscard]] double x(std::size_t i) const noexcept { return static_cast<double>(i) * dx_; }
    [[nodiscard]] std::span<const double> nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }

    [[nodiscard]] Field sample(const std::function<double(double)>& fn) const;
    [[nodiscard]] Field zeros() const { return Field(n_); }
    [[nodiscard]] Field constant(double c) const { return Field(n_, c); }

    /// Throws InvalidArgument when u has the wrong length.
    void check(const Field& u) const;

    friend bool operator==(const SpaceGrid& a, const SpaceGrid& b) noexcept {
        return a.length_ == b.length_ && a.n_ == b.n_;
    }

private:
    double length_;
    std::size_t n_;
    double dx_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Quadrature inner product sum_i w_i u_i v_i.
[[nodiscard]] double inner(const SpaceGrid& grid, std::span<const double> u, std::span<const double> v);
[[nodiscard]] double inner(const SpaceGrid& grid, const Field& u, const Field& v);
/// Quadrature mean (1/L) sum_i w_i u_i.
[[nodiscard]] double mean(const SpaceGrid& grid, const Field& u);

/// Discrete Neumann Laplacian; out may not alias u.
void apply_laplacian(const SpaceGrid& grid, std::span<const double> u, std::span<double> out);
[[nodiscard]] Field laplacian_neumann(const SpaceGrid& grid, const Field& u);

/// Solves a z - b lap z = rhs. With a = 0 the rhs must have zero mean
/// (IncompatibleData otherwise) and the zero-mean solution is returned.
[[nodiscard]] Field solve_helmholtz(const SpaceGrid& grid, double a, double b, const Field& rhs);

/// Solves diag_i z_i - b (lap z)_i = rhs_i with diag_i > 0 (Thomas elimination).
void solve_shifted(const SpaceGrid& grid, std::span<const double> diag, double b, std::span<const double> rhs,
                   std::span<double> z);

/// tau * sum_{k < m} history[k] (left rectangle rule over the m given levels).
[[nodiscard]] Field cumulative_time_integral(const SpaceGrid& grid, std::span<const Field> history, double tau);

}  // namespace gn3
