#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "maxops/detail/sliding.hpp"
#include "maxops/grid.hpp"
#include "maxops/weights.hpp"

namespace maxops {

/// Pointwise supremum field plus, for the primitive operators, the ordinal
/// (enumeration order) of the maximizing cube at each cell. Ties go to the
/// smallest ordinal. Operators assembled from other outputs leave argmax_cube
/// empty; cells with no applicable cube carry -1.
struct OperatorOutput {
    GridFunction field;
    std::vector<std::int64_t> argmax_cube;
};

namespace detail {

inline int align_up(int v, int stride) { return ((v + stride - 1) / stride) * stride; }

inline bool cube_within(const Cube& q, const Cube& outer) {
    return q.low[0] >= outer.low[0] && q.low[0] + q.side <= outer.low[0] + outer.side &&
           q.low[1] >= outer.low[1] && q.low[1] + q.side <= outer.low[1] + outer.side;
}

/// Cell term of the maximal commutator.
inline double commutator_cell(double bx, double by, double fy) {
    return std::fabs(bx - by) * std::fabs(fy);
}

/// Cell term of the weighted fractional maximal operator.
inline double fractional_cell(double fy, double muy, double r) {
    return std::pow(std::fabs(fy), r) * muy;
}

/// Cube term of the weighted fractional maximal operator.
inline double fractional_term(double cube_measure, double t_integral, double measure_exponent,
                              double inv_r) {
    return std::pow(std::pow(cube_measure, measure_exponent) * t_integral, inv_r);
}

/// Sum of |f| over the cube, cells ascending lexicographic.
inline double abs_cell_sum(const GridFunction& f, const Cube& q) {
    const Grid& g = f.grid;
    const int hi1 = g.dim == 1 ? q.low[1] + 1 : q.low[1] + q.side;
    double s = 0.0;
    for (int i0 = q.low[0]; i0 < q.low[0] + q.side; ++i0)
        for (int i1 = q.low[1]; i1 < hi1; ++i1) s += std::fabs(f.at(i0, i1));
    return s;
}

/// Sum of |f - mean| over the cube, cells ascending lexicographic. Every
/// evaluation path accumulates oscillations through this helper, so equal
/// cell sums give bitwise-equal results.
inline double deviation_cell_sum(const GridFunction& f, const Cube& q, double mean) {
    const Grid& g = f.grid;
    const int hi1 = g.dim == 1 ? q.low[1] + 1 : q.low[1] + q.side;
    double s = 0.0;
    for (int i0 = q.low[0]; i0 < q.low[0] + q.side; ++i0)
        for (int i1 = q.low[1]; i1 < hi1; ++i1) s += std::fabs(f.at(i0, i1) - mean);
    return s;
}

inline OperatorOutput scatter_seed(const Grid& g, const Cube& domain) {
    OperatorOutput out{constant_function(g, 0.0),
                       std::vector<std::int64_t>(static_cast<std::size_t>(g.cell_count()), -1)};
    for (int i = 0; i < g.cell_count(); ++i) {
        const auto c = g.cell_coords(i);
        if (domain.contains(c[0], c[1])) out.field.values[i] = -1.0;
    }
    return out;
}

/**
 * Cube-centric fast-path driver. For each family side it evaluates
 * cube_value once per anchor, then scatters the per-cell maximum with the
 * monotone-queue sweep (two separable passes in 2D). Only cubes inside
 * `domain` compete and only cells of `domain` receive values. Strict
 * comparisons everywhere keep the smallest ordinal on ties, matching the
 * naive scan over the canonical enumeration order.
 */
template <typename CubeValue>
void scatter_cube_max(const Grid& g, CubePolicy policy, const Cube& domain,
                      CubeValue&& cube_value, GridFunction& field,
                      std::vector<std::int64_t>& argmax) {
    constexpr double kUncovered = -std::numeric_limits<double>::infinity();
    for (int s : family_sides(g, policy)) {
        if (s > domain.side) continue;
        const int stride = family_stride(policy, s);
        const int a0_lo = align_up(domain.low[0], stride);
        const int a0_hi = domain.low[0] + domain.side - s;
        if (a0_lo > a0_hi) continue;
        const int c0_lo = domain.low[0], c0_hi = domain.low[0] + domain.side - 1;
        if (g.dim == 1) {
            sweep_anchor_max(
                s, stride, a0_lo, a0_hi, c0_lo, c0_hi,
                [&](int j) { return cube_value(Cube{{j, 0}, s}); },
                [&](int x, int j, double v) {
                    const int lin = g.linear_index(x);
                    if (v > field.values[lin]) {
                        field.values[lin] = v;
                        argmax[lin] = cube_ordinal(g, policy, Cube{{j, 0}, s});
                    }
                });
            continue;
        }
        const int a1_lo = align_up(domain.low[1], stride);
        const int a1_hi = domain.low[1] + domain.side - s;
        if (a1_lo > a1_hi) continue;
        const int c1_lo = domain.low[1], c1_hi = domain.low[1] + domain.side - 1;
        const int rows = (a0_hi - a0_lo) / stride + 1;
        const int dcols = c1_hi - c1_lo + 1;
        std::vector<double> row_val(static_cast<std::size_t>(rows) * dcols, kUncovered);
        std::vector<int> row_arg(static_cast<std::size_t>(rows) * dcols, -1);
        for (int rr = 0; rr < rows; ++rr) {
            const int j0 = a0_lo + rr * stride;
            sweep_anchor_max(
                s, stride, a1_lo, a1_hi, c1_lo, c1_hi,
                [&](int j1) { return cube_value(Cube{{j0, j1}, s}); },
                [&](int x1, int j1, double v) {
                    row_val[static_cast<std::size_t>(rr) * dcols + (x1 - c1_lo)] = v;
                    row_arg[static_cast<std::size_t>(rr) * dcols + (x1 - c1_lo)] = j1;
                });
        }
        for (int x1 = c1_lo; x1 <= c1_hi; ++x1) {
            sweep_anchor_max(
                s, stride, a0_lo, a0_hi, c0_lo, c0_hi,
                [&](int j0) {
                    return row_val[static_cast<std::size_t>((j0 - a0_lo) / stride) * dcols +
                                   (x1 - c1_lo)];
                },
                [&](int x0, int j0, double v) {
                    const int lin = g.linear_index(x0, x1);
                    if (v > field.values[lin]) {
                        const int j1 =
                            row_arg[static_cast<std::size_t>((j0 - a0_lo) / stride) * dcols +
                                    (x1 - c1_lo)];
                        field.values[lin] = v;
                        argmax[lin] = cube_ordinal(g, policy, Cube{{j0, j1}, s});
                    }
                });
        }
    }
}

/// Oracle driver: at every cell of `domain`, scans the whole family in
/// enumeration order and keeps the first maximum of cube_value(q, cell).
template <typename CubeValue>
OperatorOutput naive_scan(const Grid& g, const CubeFamily& fam, const Cube& domain,
                          CubeValue&& cube_value) {
    OperatorOutput out{constant_function(g, 0.0),
                       std::vector<std::int64_t>(static_cast<std::size_t>(g.cell_count()), -1)};
    for (int x = 0; x < g.cell_count(); ++x) {
        const auto c = g.cell_coords(x);
        if (!domain.contains(c[0], c[1])) continue;
        double best = -1.0;
        std::int64_t best_ord = -1;
        for (std::size_t k = 0; k < fam.cubes.size(); ++k) {
            const Cube& q = fam.cubes[k];
            if (!cube_within(q, domain) || !q.contains(c[0], c[1])) continue;
            const double v = cube_value(q, x);
            if (v > best) {
                best = v;
                best_ord = static_cast<std::int64_t>(k);
            }
        }
        out.field.values[x] = best;
        out.argmax_cube[x] = best_ord;
    }
    return out;
}

inline GridFunction commutator_combine(const GridFunction& symbol, const GridFunction& outer,
                                       const GridFunction& inner) {
    GridFunction out = outer;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = symbol.values[i] * outer.values[i] - inner.values[i];
    return out;
}

} // namespace detail

/// Maximal function: at each cell, the largest average of |f| over family
/// cubes containing it.
inline OperatorOutput hl_maximal(const GridFunction& f, const CubeFamily& fam) {
    const Grid& g = f.grid;
    const PrefixTable abs_prefix(abs_field(f));
    OperatorOutput out = detail::scatter_seed(g, Cube{{0, 0}, g.extent});
    detail::scatter_cube_max(
        g, fam.policy, Cube{{0, 0}, g.extent},
        [&](const Cube& q) { return abs_prefix.average(q); }, out.field, out.argmax_cube);
    return out;
}

inline OperatorOutput hl_maximal_naive(const GridFunction& f, const CubeFamily& fam) {
    const Grid& g = f.grid;
    return detail::naive_scan(g, fam, Cube{{0, 0}, g.extent}, [&](const Cube& q, int) {
        return average_from_cell_sum(detail::abs_cell_sum(f, q), g, q);
    });
}

/// Local maximal function: the supremum is restricted to family cubes inside
/// q0; cells outside q0 get value 0 and no witness.
inline OperatorOutput local_maximal(const GridFunction& f, const Cube& q0,
                                    const CubeFamily& fam) {
    const Grid& g = f.grid;
    validate(g, q0);
    const PrefixTable abs_prefix(abs_field(f));
    OperatorOutput out = detail::scatter_seed(g, q0);
    detail::scatter_cube_max(
        g, fam.policy, q0, [&](const Cube& q) { return abs_prefix.average(q); }, out.field,
        out.argmax_cube);
    return out;
}

inline OperatorOutput local_maximal_naive(const GridFunction& f, const Cube& q0,
                                          const CubeFamily& fam) {
    const Grid& g = f.grid;
    validate(g, q0);
    return detail::naive_scan(g, fam, q0, [&](const Cube& q, int) {
        return average_from_cell_sum(detail::abs_cell_sum(f, q), g, q);
    });
}

/// Sharp maximal function: the largest mean oscillation over containing
/// family cubes.
inline OperatorOutput sharp_maximal(const GridFunction& f, const CubeFamily& fam) {
    const Grid& g = f.grid;
    const PrefixTable prefix(f);
    OperatorOutput out = detail::scatter_seed(g, Cube{{0, 0}, g.extent});
    detail::scatter_cube_max(
        g, fam.policy, Cube{{0, 0}, g.extent},
        [&](const Cube& q) {
            const double mean = prefix.average(q);
            return average_from_cell_sum(detail::deviation_cell_sum(f, q, mean), g, q);
        },
        out.field, out.argmax_cube);
    return out;
}

inline OperatorOutput sharp_maximal_naive(const GridFunction& f, const CubeFamily& fam) {
    const Grid& g = f.grid;
    return detail::naive_scan(g, fam, Cube{{0, 0}, g.extent}, [&](const Cube& q, int) {
        const double mean = average(f, q);
        return average_from_cell_sum(detail::deviation_cell_sum(f, q, mean), g, q);
    });
}

/// Maximal commutator: at each cell x, the largest average of
/// |b(x) - b(y)| |f(y)| over containing family cubes.
inline OperatorOutput maximal_commutator(const GridFunction& b, const GridFunction& f,
                                         const CubeFamily& fam) {
    require_same_grid(b.grid, f.grid, "maximal commutator");
    const Grid& g = b.grid;
    OperatorOutput out{constant_function(g, 0.0),
                       std::vector<std::int64_t>(static_cast<std::size_t>(g.cell_count()), -1)};
    GridFunction gx = constant_function(g, 0.0);
    for (int x = 0; x < g.cell_count(); ++x) {
        const double bx = b.values[x];
        for (int y = 0; y < g.cell_count(); ++y)
            gx.values[y] = detail::commutator_cell(bx, b.values[y], f.values[y]);
        const PrefixTable pt(gx);
        const auto c = g.cell_coords(x);
        double best = -1.0;
        std::int64_t best_ord = -1;
        for (int s : family_sides(g, fam.policy)) {
            const int stride = family_stride(fam.policy, s);
            const int lo0 = detail::align_up(std::max(0, c[0] - s + 1), stride);
            const int hi0 = std::min(c[0], g.extent - s);
            const int lo1 =
                g.dim == 1 ? 0 : detail::align_up(std::max(0, c[1] - s + 1), stride);
            const int hi1 = g.dim == 1 ? 0 : std::min(c[1], g.extent - s);
            for (int j0 = lo0; j0 <= hi0; j0 += stride)
                for (int j1 = lo1; j1 <= hi1; j1 += stride) {
                    const Cube q{{j0, j1}, s};
                    const double v = pt.average(q);
                    if (v > best) {
                        best = v;
                        best_ord = cube_ordinal(g, fam.policy, q);
                    }
                }
        }
        out.field.values[x] = best;
        out.argmax_cube[x] = best_ord;
    }
    return out;
}

inline OperatorOutput maximal_commutator_naive(const GridFunction& b, const GridFunction& f,
                                               const CubeFamily& fam) {
    require_same_grid(b.grid, f.grid, "maximal commutator");
    const Grid& g = b.grid;
    return detail::naive_scan(g, fam, Cube{{0, 0}, g.extent}, [&](const Cube& q, int x) {
        const int hi1 = g.dim == 1 ? q.low[1] + 1 : q.low[1] + q.side;
        double s = 0.0;
        for (int i0 = q.low[0]; i0 < q.low[0] + q.side; ++i0)
            for (int i1 = q.low[1]; i1 < hi1; ++i1)
                s += detail::commutator_cell(b.values[x], b.at(i0, i1), f.at(i0, i1));
        return average_from_cell_sum(s, g, q);
    });
}

/// Commutator with the maximal operator, b M(f) - M(bf), assembled from the
/// primitive outputs. No per-cell witness exists for the difference.
inline OperatorOutput commutator_M(const GridFunction& b, const GridFunction& f,
                                   const CubeFamily& fam) {
    require_same_grid(b.grid, f.grid, "commutator with the maximal operator");
    const GridFunction outer = hl_maximal(f, fam).field;
    const GridFunction inner = hl_maximal(pointwise_product(b, f), fam).field;
    return OperatorOutput{detail::commutator_combine(b, outer, inner), {}};
}

inline OperatorOutput commutator_M_naive(const GridFunction& b, const GridFunction& f,
                                         const CubeFamily& fam) {
    require_same_grid(b.grid, f.grid, "commutator with the maximal operator");
    const GridFunction outer = hl_maximal_naive(f, fam).field;
    const GridFunction inner = hl_maximal_naive(pointwise_product(b, f), fam).field;
    return OperatorOutput{detail::commutator_combine(b, outer, inner), {}};
}

/// Commutator with the sharp maximal operator, b M#(f) - M#(bf).
inline OperatorOutput commutator_sharp(const GridFunction& b, const GridFunction& f,
                                       const CubeFamily& fam) {
    require_same_grid(b.grid, f.grid, "commutator with the sharp maximal operator");
    const GridFunction outer = sharp_maximal(f, fam).field;
    const GridFunction inner = sharp_maximal(pointwise_product(b, f), fam).field;
    return OperatorOutput{detail::commutator_combine(b, outer, inner), {}};
}

inline OperatorOutput commutator_sharp_naive(const GridFunction& b, const GridFunction& f,
                                             const CubeFamily& fam) {
    require_same_grid(b.grid, f.grid, "commutator with the sharp maximal operator");
    const GridFunction outer = sharp_maximal_naive(f, fam).field;
    const GridFunction inner = sharp_maximal_naive(pointwise_product(b, f), fam).field;
    return OperatorOutput{detail::commutator_combine(b, outer, inner), {}};
}

/// Weighted fractional maximal operator:
/// sup over containing cubes of ( mu(Q)^(r beta/dim - 1) * integral(|f|^r mu, Q) )^(1/r).
inline OperatorOutput fractional_maximal(const GridFunction& f, const Weight& mu, double beta,
                                         double r, const CubeFamily& fam) {
    require_same_grid(f.grid, mu.grid(), "fractional maximal operator");
    if (!(r >= 1.0) || !std::isfinite(r))
        throw std::invalid_argument("fractional maximal operator: requires r >= 1");
    if (!std::isfinite(beta))
        throw std::invalid_argument("fractional maximal operator: beta must be finite");
    const Grid& g = f.grid;
    const double measure_exponent = r * beta / g.dim - 1.0;
    const double inv_r = 1.0 / r;
    GridFunction t = constant_function(g, 0.0);
    for (int i = 0; i < g.cell_count(); ++i)
        t.values[i] = detail::fractional_cell(f.values[i], mu.value(i), r);
    const PrefixTable tp(t);
    OperatorOutput out = detail::scatter_seed(g, Cube{{0, 0}, g.extent});
    detail::scatter_cube_max(
        g, fam.policy, Cube{{0, 0}, g.extent},
        [&](const Cube& q) {
            return detail::fractional_term(mu.measure(q), tp.integral(q), measure_exponent,
                                           inv_r);
        },
        out.field, out.argmax_cube);
    return out;
}

inline OperatorOutput fractional_maximal_naive(const GridFunction& f, const Weight& mu,
                                               double beta, double r, const CubeFamily& fam) {
    require_same_grid(f.grid, mu.grid(), "fractional maximal operator");
    if (!(r >= 1.0) || !std::isfinite(r))
        throw std::invalid_argument("fractional maximal operator: requires r >= 1");
    if (!std::isfinite(beta))
        throw std::invalid_argument("fractional maximal operator: beta must be finite");
    const Grid& g = f.grid;
    const double measure_exponent = r * beta / g.dim - 1.0;
    const double inv_r = 1.0 / r;
    return detail::naive_scan(g, fam, Cube{{0, 0}, g.extent}, [&](const Cube& q, int) {
        const int hi1 = g.dim == 1 ? q.low[1] + 1 : q.low[1] + q.side;
        double msum = 0.0, tsum = 0.0;
        for (int i0 = q.low[0]; i0 < q.low[0] + q.side; ++i0)
            for (int i1 = q.low[1]; i1 < hi1; ++i1) {
                msum += mu.at(i0, i1);
                tsum += detail::fractional_cell(f.at(i0, i1), mu.at(i0, i1), r);
            }
        return detail::fractional_term(integral_from_cell_sum(msum, g),
                                       integral_from_cell_sum(tsum, g), measure_exponent,
                                       inv_r);
    });
}

} // namespace maxops
