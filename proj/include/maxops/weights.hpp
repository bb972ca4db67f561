#pragma once

#include <cmath>
#include <utility>

#include "maxops/detail/sliding.hpp"
#include "maxops/grid.hpp"

namespace maxops {

/// Strictly positive density sampled at cell centers, with a prefix table so
/// cube measures cost O(1).
class Weight {
public:
    explicit Weight(GridFunction f) : field_(std::move(f)), prefix_(field_) {
        for (double v : field_.values)
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument("weight: values must be finite and > 0");
    }

    const Grid& grid() const { return field_.grid; }
    const GridFunction& field() const { return field_; }
    const PrefixTable& prefix() const { return prefix_; }
    double value(int linear) const { return field_.values[linear]; }
    double at(int i0, int i1 = 0) const { return field_.at(i0, i1); }

    /// mu(Q): integral of the weight over the cube.
    double measure(const Cube& q) const { return prefix_.integral(q); }
    double measure_box(const CellBox& b) const {
        return integral_from_cell_sum(prefix_.cell_sum_box(b), field_.grid);
    }

private:
    GridFunction field_;
    PrefixTable prefix_;
};

inline Weight make_weight(GridFunction f) { return Weight(std::move(f)); }

inline Weight constant_weight(const Grid& g, double c) {
    if (!(c > 0.0) || !std::isfinite(c))
        throw std::invalid_argument("constant weight: level must be finite and > 0");
    return Weight(constant_function(g, c));
}

/// |x|^alpha sampled at cell centers (Euclidean |x| in 2D). The domain must
/// keep cell centers away from the origin when alpha < 0.
inline Weight power_weight(const Grid& g, double alpha) {
    validate(g);
    std::vector<double> v(std::size_t(g.cell_count()));
    for (int i0 = 0; i0 < g.extent; ++i0) {
        if (g.dim == 1) {
            v[std::size_t(i0)] = std::pow(std::fabs(g.center(i0)), alpha);
        } else {
            for (int i1 = 0; i1 < g.extent; ++i1)
                v[std::size_t(g.linear_index(i0, i1))] =
                    std::pow(std::hypot(g.center(i0), g.center(i1)), alpha);
        }
    }
    return Weight(make_grid_function(g, std::move(v)));
}

/// Exponent range in which |x|^alpha is an A_1 weight.
inline bool alpha_in_a1_range(double alpha, int dim) { return alpha > -dim && alpha <= 0.0; }

inline Weight pointwise_power(const Weight& w, double e) {
    GridFunction f = w.field();
    for (double& v : f.values) v = std::pow(v, e);
    return Weight(std::move(f));
}

struct ApReport {
    double p = 1.0;
    double constant = 1.0;
    Cube witness;
};

namespace detail {

/// Per-anchor cell minima of `v` for cubes of side `width` at anchors that
/// are multiples of `stride`; row-column decomposition in 2D.
inline std::vector<double> cube_cell_minima(const GridFunction& v, int width, int stride) {
    const Grid& g = v.grid;
    std::vector<double> out;
    if (g.dim == 1) {
        window_min(v.values.data(), g.extent, width, stride, out);
        return out;
    }
    const int e = g.extent;
    const int rows_out = (e - width) / stride + 1;
    std::vector<double> row_min;
    row_min.reserve(std::size_t(e) * rows_out);
    for (int i0 = 0; i0 < e; ++i0)
        window_min(v.values.data() + std::size_t(i0) * e, e, width, stride, row_min);
    const int cols_out = rows_out;
    // row_min is e rows by cols_out anchors; now slide down each anchor column.
    std::vector<double> col(static_cast<std::size_t>(e));
    std::vector<double> col_out;
    out.assign(std::size_t(rows_out) * cols_out, 0.0);
    for (int j1 = 0; j1 < cols_out; ++j1) {
        for (int i0 = 0; i0 < e; ++i0) col[std::size_t(i0)] = row_min[std::size_t(i0) * cols_out + j1];
        col_out.clear();
        window_min(col.data(), e, width, stride, col_out);
        for (int j0 = 0; j0 < rows_out; ++j0) out[std::size_t(j0) * cols_out + j1] = col_out[std::size_t(j0)];
    }
    return out;
}

} // namespace detail

/// A_1 characteristic: sup over the family of avg_Q(mu) / min_Q(mu).
inline ApReport a1_constant(const Weight& w, const CubeFamily& fam) {
    const Grid& g = w.grid();
    ApReport rep{1.0, 0.0, Cube{}};
    bool first = true;
    for (int s : family_sides(g, fam.policy)) {
        const int stride = family_stride(fam.policy, s);
        const auto mins = detail::cube_cell_minima(w.field(), s, stride);
        const int per_axis = (g.extent - s) / stride + 1;
        std::size_t idx = 0;
        for (int l0 = 0; l0 + s <= g.extent; l0 += stride) {
            const int l1_count = g.dim == 1 ? 1 : per_axis;
            for (int k1 = 0; k1 < l1_count; ++k1, ++idx) {
                const Cube q{{l0, g.dim == 1 ? 0 : k1 * stride}, s};
                const double expr = w.prefix().average(q) / mins[idx];
                if (first || expr > rep.constant) {
                    rep.constant = expr;
                    rep.witness = q;
                    first = false;
                }
            }
        }
    }
    return rep;
}

/// A_p characteristic for p > 1:
/// sup over the family of avg_Q(mu) * avg_Q(mu^(1-p'))^(p-1), 1/p + 1/p' = 1.
inline ApReport ap_constant(const Weight& w, double p, const CubeFamily& fam) {
    if (!(p > 1.0) || !std::isfinite(p))
        throw std::invalid_argument("ap constant: requires p > 1 (use a1_constant for p = 1)");
    const double dual_exponent = 1.0 - p / (p - 1.0);
    GridFunction powered = w.field();
    for (double& v : powered.values) v = std::pow(v, dual_exponent);
    const PrefixTable powered_prefix(powered);

    ApReport rep{p, 0.0, Cube{}};
    bool first = true;
    for (const Cube& q : fam.cubes) {
        const double expr =
            w.prefix().average(q) * std::pow(powered_prefix.average(q), p - 1.0);
        if (first || expr > rep.constant) {
            rep.constant = expr;
            rep.witness = q;
            first = false;
        }
    }
    return rep;
}

struct PointPair {
    int a = 0;
    int b = 0;
};

struct SmoothnessReport {
    double constant = 0.0;
    PointPair witness;
};

namespace detail {

/// Measure of the closed Euclidean ball B(center_cell, radius), taking every
/// cell whose center lies inside. Radius is a physical distance.
inline double ball_measure(const Weight& w, int center_linear, double radius) {
    const Grid& g = w.grid();
    const auto c = g.cell_coords(center_linear);
    const double cx = g.center(c[0]);
    if (g.dim == 1) {
        double m = 0.0;
        for (int i = 0; i < g.extent; ++i)
            if (std::fabs(g.center(i) - cx) <= radius) m += w.value(i);
        return integral_from_cell_sum(m, g);
    }
    const double cy = g.center(c[1]);
    double m = 0.0;
    for (int i0 = 0; i0 < g.extent; ++i0)
        for (int i1 = 0; i1 < g.extent; ++i1)
            if (std::hypot(g.center(i0) - cx, g.center(i1) - cy) <= radius)
                m += w.value(g.linear_index(i0, i1));
    return integral_from_cell_sum(m, g);
}

} // namespace detail

/// Largest ratio |b(x)-b(y)| / ( w(B(x,|x-y|))^(beta/dim) * (w(x)+w(y)) )
/// over the sampled point pairs; coincident pairs are skipped. This is the
/// pointwise-smoothness constant of the symbol relative to the weight.
inline SmoothnessReport smoothness_constant(const GridFunction& b, const Weight& w, double beta,
                                      const std::vector<PointPair>& sample_pairs) {
    require_same_grid(b.grid, w.grid(), "pointwise smoothness constant");
    const Grid& g = b.grid;
    SmoothnessReport res;
    for (const PointPair& pr : sample_pairs) {
        const auto ca = g.cell_coords(pr.a), cb = g.cell_coords(pr.b);
        const double dist = g.dim == 1
                                ? std::fabs(g.center(ca[0]) - g.center(cb[0]))
                                : std::hypot(g.center(ca[0]) - g.center(cb[0]),
                                             g.center(ca[1]) - g.center(cb[1]));
        if (dist == 0.0) continue;
        const double ball = detail::ball_measure(w, pr.a, dist);
        const double denom = std::pow(ball, beta / g.dim) * (w.value(pr.a) + w.value(pr.b));
        const double ratio = std::fabs(b.values[pr.a] - b.values[pr.b]) / denom;
        if (ratio > res.constant) {
            res.constant = ratio;
            res.witness = pr;
        }
    }
    return res;
}

} // namespace maxops
