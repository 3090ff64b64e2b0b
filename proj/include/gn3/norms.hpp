#pragma once

// Discrete spatial norms H = L^2, V = H^1, V' (through the Riesz map
// z - lap z = h) and W (Neumann H^2), Bochner aggregation over time levels,
// and log-log rate fitting.

#include "gn3/grid.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gn3 {

[[nodiscard]] double norm_H(const SpaceGrid& grid, const Field& u);
/// ||grad u||_H with forward differences on cell midpoints.
[[nodiscard]] double gradient_norm(const SpaceGrid& grid, const Field& u);
[[nodiscard]] double norm_V(const SpaceGrid& grid, const Field& u);
[[nodiscard]] double norm_Vdual(const SpaceGrid& grid, const Field& h);
[[nodiscard]] double norm_W(const SpaceGrid& grid, const Field& u);

enum class SpaceNorm { H, V, Vdual, W };

enum class TimeAggregation {
    LinfT,   ///< max over time levels 0..M
    L2T,     ///< sqrt(tau * sum over levels 1..M)
    W1infT,  ///< max over steps of the norm of the backward difference quotient
    H1T,     ///< sqrt(tau * sum over steps of that norm squared)
};

struct NormKind {
    SpaceNorm space;
    TimeAggregation time;

    /// e.g. "Linf(V)", "W1inf(H)".
    [[nodiscard]] std::string label() const;
    friend bool operator==(const NormKind&, const NormKind&) = default;
};

[[nodiscard]] double spatial_norm(const SpaceGrid& grid, SpaceNorm kind, const Field& u);

/// Throws InvalidArgument when the sequence is empty, or has fewer than two
/// levels for the derivative aggregations.
[[nodiscard]] double bochner(const SpaceGrid& grid, NormKind kind, std::span<const Field> levels, double tau);

struct RateFit {
    double slope = 0.0;
    double residual = 0.0;
    std::size_t n_used = 0;
    std::size_t n_dropped = 0;  ///< zero errors skipped
};

/// Least squares slope of log(error) against log(alpha). Needs at least three
/// points with alpha > 0 and error >= 0; zero errors are dropped with a
/// warning on stderr. Throws DegenerateComparison if all errors are zero.
[[nodiscard]] RateFit fit_rate(std::span<const std::pair<double, double>> points);

struct RateEntry {
    std::string norm_kind;
    std::vector<std::pair<double, double>> points;
    RateFit fit;
};

struct RateReport {
    std::vector<RateEntry> entries;
    std::vector<std::string> hypotheses;  ///< which error estimate hypothesis sets the data satisfy

    [[nodiscard]] const RateEntry& at(const std::string& norm_kind) const;
};

}  // namespace gn3
