#include "gn3/norms.hpp"

#include "gn3/error.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace gn3 {

double norm_H(const SpaceGrid& grid, const Field& u) { return std::sqrt(inner(grid, u, u)); }

double gradient_norm(const SpaceGrid& grid, const Field& u) {
    grid.check(u);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const double d = u[i + 1] - u[i];
        s += d * d;
    }
    return std::sqrt(s / grid.dx());
}

double norm_V(const SpaceGrid& grid, const Field& u) {
    const double h = norm_H(grid, u);
    const double g = gradient_norm(grid, u);
    return std::sqrt(h * h + g * g);
}

double norm_Vdual(const SpaceGrid& grid, const Field& h) {
    const Field z = solve_helmholtz(grid, 1.0, 1.0, h);
    return std::sqrt(std::max(0.0, inner(grid, h, z)));
}

double norm_W(const SpaceGrid& grid, const Field& u) {
    const double v = norm_V(grid, u);
    const double l = norm_H(grid, laplacian_neumann(grid, u));
    return std::sqrt(v * v + l * l);
}

std::string NormKind::label() const {
    std::string t;
    switch (time) {
        case TimeAggregation::LinfT: t = "Linf"; break;
        case TimeAggregation::L2T: t = "L2"; break;
        case TimeAggregation::W1infT: t = "W1inf"; break;
        case TimeAggregation::H1T: t = "H1"; break;
    }
    std::string s;
    switch (space) {
        case SpaceNorm::H: s = "H"; break;
        case SpaceNorm::V: s = "V"; break;
        case SpaceNorm::Vdual: s = "V'"; break;
        case SpaceNorm::W: s = "W"; break;
    }
    return t + "(" + s + ")";
}

double spatial_norm(const SpaceGrid& grid, SpaceNorm kind, const Field& u) {
    switch (kind) {
        case SpaceNorm::H: return norm_H(grid, u);
        case SpaceNorm::V: return norm_V(grid, u);
        case SpaceNorm::Vdual: return norm_Vdual(grid, u);
        case SpaceNorm::W: return norm_W(grid, u);
    }
    return 0.0;
}

double bochner(const SpaceGrid& grid, NormKind kind, std::span<const Field> levels, double tau) {
    if (!(tau > 0.0)) throw InvalidArgument("bochner: tau must be positive");
    const bool derivative = kind.time == TimeAggregation::W1infT || kind.time == TimeAggregation::H1T;
    if (levels.empty() || (derivative && levels.size() < 2))
        throw InvalidArgument("bochner: trajectory has too few time levels for " + kind.label());

    double max_v = 0.0;
    double sum_sq = 0.0;
    if (derivative) {
        for (std::size_t m = 1; m < levels.size(); ++m) {
            Field d = levels[m] - levels[m - 1];
            d *= 1.0 / tau;
            const double n = spatial_norm(grid, kind.space, d);
            max_v = std::max(max_v, n);
            sum_sq += n * n;
        }
    } else {
        for (std::size_t m = 0; m < levels.size(); ++m) {
            const double n = spatial_norm(grid, kind.space, levels[m]);
            max_v = std::max(max_v, n);
            if (m > 0) sum_sq += n * n;
        }
    }
    switch (kind.time) {
        case TimeAggregation::LinfT:
        case TimeAggregation::W1infT: return max_v;
        case TimeAggregation::L2T:
        case TimeAggregation::H1T: return std::sqrt(tau * sum_sq);
    }
    return 0.0;
}

RateFit fit_rate(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) throw InvalidArgument("fit_rate: need >= 3 sweep points");
    std::vector<double> lx;
    std::vector<double> ly;
    RateFit fit;
    for (const auto& [alpha, err] : points) {
        if (!(alpha > 0.0)) throw InvalidArgument("fit_rate: alpha must be positive");
        if (!(err >= 0.0) || !std::isfinite(err)) throw InvalidArgument("fit_rate: errors must be finite and >= 0");
        if (err == 0.0) {
            ++fit.n_dropped;
            continue;
        }
        lx.push_back(std::log(alpha));
        ly.push_back(std::log(err));
    }
    if (lx.empty()) throw DegenerateComparison("fit_rate: all errors are zero (identical runs)");
    if (fit.n_dropped > 0)
        std::cerr << "warning: fit_rate dropped " << fit.n_dropped << " zero error(s)\n";
    if (lx.size() < 2) throw DegenerateComparison("fit_rate: fewer than two nonzero errors");

    const double n = static_cast<double>(lx.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw InvalidArgument("fit_rate: alphas must not all coincide");
    fit.slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (my + fit.slope * (lx[i] - mx));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    fit.n_used = lx.size();
    return fit;
}

const RateEntry& RateReport::at(const std::string& norm_kind) const {
    auto it = std::find_if(entries.begin(), entries.end(), [&](const RateEntry& e) { return e.norm_kind == norm_kind; });
    if (it == entries.end()) throw InvalidArgument("rate report has no entry " + norm_kind);
    return *it;
}

}  // namespace gn3
