#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace maxops {

/// Uniform grid over a square domain. Each axis carries `extent` cells of
/// width `spacing`; the center of cell i sits at origin + (i + 1/2)*spacing,
/// so a symmetric domain never places a cell center on the origin itself.
struct Grid {
    int dim = 1;
    int extent = 2;
    double spacing = 1.0;
    double origin = 0.0;

    int cell_count() const { return dim == 1 ? extent : extent * extent; }
    double center(int i) const { return origin + (i + 0.5) * spacing; }
    int linear_index(int i0, int i1 = 0) const { return dim == 1 ? i0 : i0 * extent + i1; }
    std::array<int, 2> cell_coords(int linear) const {
        return dim == 1 ? std::array<int, 2>{linear, 0}
                        : std::array<int, 2>{linear / extent, linear % extent};
    }
    bool operator==(const Grid&) const = default;
};

inline void validate(const Grid& g) {
    if (g.dim != 1 && g.dim != 2) throw std::invalid_argument("grid: dim must be 1 or 2");
    if (g.extent < 2) throw std::invalid_argument("grid: extent must be >= 2");
    if (!std::isfinite(g.spacing) || g.spacing <= 0.0)
        throw std::invalid_argument("grid: spacing must be finite and > 0");
    if (!std::isfinite(g.origin)) throw std::invalid_argument("grid: origin must be finite");
}

inline Grid make_grid(int dim, int extent, double spacing, double origin) {
    Grid g{dim, extent, spacing, origin};
    validate(g);
    return g;
}

/// Axis-aligned cube of `side` cells per axis, anchored at cell `low`.
/// In 1D the second coordinate is kept at 0.
struct Cube {
    std::array<int, 2> low{0, 0};
    int side = 1;

    bool contains(int i0, int i1 = 0) const {
        return i0 >= low[0] && i0 < low[0] + side && i1 >= low[1] && i1 < low[1] + side;
    }
    bool operator==(const Cube&) const = default;
};

inline bool cube_inside(const Grid& g, const Cube& q) {
    if (q.side < 1) return false;
    for (int a = 0; a < g.dim; ++a)
        if (q.low[a] < 0 || q.low[a] + q.side > g.extent) return false;
    return g.dim == 2 || q.low[1] == 0;
}

inline void validate(const Grid& g, const Cube& q) {
    if (!cube_inside(g, q)) throw std::invalid_argument("cube: not contained in grid");
}

inline Cube make_cube(const Grid& g, int low0, int side) {
    Cube q{{low0, 0}, side};
    validate(g, q);
    return q;
}

inline Cube make_cube(const Grid& g, int low0, int low1, int side) {
    Cube q{{low0, g.dim == 1 ? 0 : low1}, side};
    validate(g, q);
    return q;
}

inline std::int64_t cube_cell_count(const Grid& g, const Cube& q) {
    return g.dim == 1 ? q.side : std::int64_t(q.side) * q.side;
}

// Canonical evaluation order for cube averages, shared by every code path:
//   integral = cell_sum * cell_volume
//   volume   = cell_count * cell_volume
//   average  = integral / volume
// Fast (prefix-table) and naive (loop) paths both route through these helpers,
// so their outputs agree bit for bit whenever their cell sums do.
inline double cell_volume(const Grid& g) {
    return g.dim == 1 ? g.spacing : g.spacing * g.spacing;
}

inline double integral_from_cell_sum(double cell_sum, const Grid& g) {
    return cell_sum * cell_volume(g);
}

inline double cube_volume(const Grid& g, const Cube& q) {
    return double(cube_cell_count(g, q)) * cell_volume(g);
}

inline double average_from_cell_sum(double cell_sum, const Grid& g, const Cube& q) {
    return integral_from_cell_sum(cell_sum, g) / cube_volume(g, q);
}

/// Half-open box of cells, used for cube intersections.
struct CellBox {
    std::array<int, 2> lo{0, 0};
    std::array<int, 2> hi{0, 0};

    std::int64_t cell_count(int dim) const {
        std::int64_t n = hi[0] - lo[0];
        if (dim == 2) n *= hi[1] - lo[1];
        return n;
    }
};

inline CellBox box_of(const Grid& g, const Cube& q) {
    CellBox b{{q.low[0], q.low[1]}, {q.low[0] + q.side, q.low[1] + q.side}};
    if (g.dim == 1) b.lo[1] = 0, b.hi[1] = 1;
    return b;
}

inline std::optional<CellBox> intersect(const Grid& g, const Cube& a, const Cube& b) {
    CellBox ba = box_of(g, a), bb = box_of(g, b), r;
    for (int ax = 0; ax < 2; ++ax) {
        r.lo[ax] = std::max(ba.lo[ax], bb.lo[ax]);
        r.hi[ax] = std::min(ba.hi[ax], bb.hi[ax]);
        if (r.lo[ax] >= r.hi[ax]) return std::nullopt;
    }
    return r;
}

/// Scalar field sampled at cell centers, stored in ascending lexicographic
/// cell order (1D: i0; 2D: i0*extent + i1).
struct GridFunction {
    Grid grid;
    std::vector<double> values;

    double at(int i0, int i1 = 0) const { return values[grid.linear_index(i0, i1)]; }
    double& at(int i0, int i1 = 0) { return values[grid.linear_index(i0, i1)]; }
};

inline GridFunction make_grid_function(const Grid& g, std::vector<double> values) {
    validate(g);
    if (int(values.size()) != g.cell_count())
        throw std::invalid_argument("grid function: value count does not match grid");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("grid function: values must be finite");
    return GridFunction{g, std::move(values)};
}

inline GridFunction constant_function(const Grid& g, double c) {
    return make_grid_function(g, std::vector<double>(g.cell_count(), c));
}

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grids do not match");
}

inline GridFunction abs_field(const GridFunction& f) {
    GridFunction r = f;
    for (double& v : r.values) v = std::fabs(v);
    return r;
}

inline GridFunction pointwise_product(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a.grid, b.grid, "pointwise product");
    GridFunction r = a;
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = a.values[i] * b.values[i];
    return r;
}

inline GridFunction indicator(const Grid& g, const Cube& q) {
    validate(g, q);
    GridFunction r = constant_function(g, 0.0);
    for (int i0 = q.low[0]; i0 < q.low[0] + q.side; ++i0) {
        if (g.dim == 1) {
            r.at(i0) = 1.0;
        } else {
            for (int i1 = q.low[1]; i1 < q.low[1] + q.side; ++i1) r.at(i0, i1) = 1.0;
        }
    }
    return r;
}

/// Sum of cell values over a cube, accumulated in ascending lexicographic
/// cell order. This is the naive path every fast path is measured against.
inline double cell_sum(const GridFunction& f, const Cube& q) {
    double s = 0.0;
    if (f.grid.dim == 1) {
        for (int i0 = q.low[0]; i0 < q.low[0] + q.side; ++i0) s += f.values[i0];
    } else {
        for (int i0 = q.low[0]; i0 < q.low[0] + q.side; ++i0)
            for (int i1 = q.low[1]; i1 < q.low[1] + q.side; ++i1)
                s += f.values[f.grid.linear_index(i0, i1)];
    }
    return s;
}

inline double integral(const GridFunction& f, const Cube& q) {
    return integral_from_cell_sum(cell_sum(f, q), f.grid);
}

inline double average(const GridFunction& f, const Cube& q) {
    return average_from_cell_sum(cell_sum(f, q), f.grid, q);
}

/// Summed-area table over cell values: O(extent^dim) to build, O(1) per
/// box query afterwards.
class PrefixTable {
public:
    explicit PrefixTable(const GridFunction& f) : grid_(f.grid) {
        validate(grid_);
        const int e = grid_.extent;
        if (grid_.dim == 1) {
            table_.assign(e + 1, 0.0);
            for (int i = 0; i < e; ++i) table_[i + 1] = table_[i] + f.values[i];
        } else {
            const int w = e + 1;
            table_.assign(std::size_t(w) * w, 0.0);
            for (int i0 = 0; i0 < e; ++i0)
                for (int i1 = 0; i1 < e; ++i1)
                    table_[std::size_t(i0 + 1) * w + (i1 + 1)] =
                        f.values[f.grid.linear_index(i0, i1)] +
                        table_[std::size_t(i0) * w + (i1 + 1)] +
                        table_[std::size_t(i0 + 1) * w + i1] - table_[std::size_t(i0) * w + i1];
        }
    }

    const Grid& grid() const { return grid_; }

    double cell_sum_box(const CellBox& b) const {
        if (grid_.dim == 1) return table_[b.hi[0]] - table_[b.lo[0]];
        const int w = grid_.extent + 1;
        auto p = [&](int i0, int i1) { return table_[std::size_t(i0) * w + i1]; };
        return p(b.hi[0], b.hi[1]) - p(b.lo[0], b.hi[1]) - p(b.hi[0], b.lo[1]) +
               p(b.lo[0], b.lo[1]);
    }

    double cell_sum(const Cube& q) const { return cell_sum_box(box_of(grid_, q)); }
    double integral(const Cube& q) const { return integral_from_cell_sum(cell_sum(q), grid_); }
    double average(const Cube& q) const {
        return average_from_cell_sum(cell_sum(q), grid_, q);
    }

private:
    Grid grid_;
    std::vector<double> table_;
};

enum class CubePolicy { all, dyadic };

/// Deterministically ordered cube collection: side ascending, then low
/// corner in lexicographic order. `all` takes every side and offset;
/// `dyadic` takes power-of-two sides at offsets that are multiples of the
/// side (a disjoint tiling per side).
struct CubeFamily {
    CubePolicy policy = CubePolicy::all;
    std::vector<Cube> cubes;
};

inline std::vector<int> family_sides(const Grid& g, CubePolicy policy) {
    std::vector<int> sides;
    if (policy == CubePolicy::all) {
        for (int s = 1; s <= g.extent; ++s) sides.push_back(s);
    } else {
        for (int s = 1; s <= g.extent; s *= 2) sides.push_back(s);
    }
    return sides;
}

inline int family_stride(CubePolicy policy, int side) {
    return policy == CubePolicy::all ? 1 : side;
}

inline CubeFamily enumerate_cubes(const Grid& g, CubePolicy policy) {
    validate(g);
    CubeFamily fam{policy, {}};
    for (int s : family_sides(g, policy)) {
        const int stride = family_stride(policy, s);
        for (int l0 = 0; l0 + s <= g.extent; l0 += stride) {
            if (g.dim == 1) {
                fam.cubes.push_back(Cube{{l0, 0}, s});
            } else {
                for (int l1 = 0; l1 + s <= g.extent; l1 += stride)
                    fam.cubes.push_back(Cube{{l0, l1}, s});
            }
        }
    }
    return fam;
}

/// Position of a cube in the enumerate_cubes ordering, computed without the
/// list. Fast paths use this to report witnesses at large extents.
inline std::int64_t cube_ordinal(const Grid& g, CubePolicy policy, const Cube& q) {
    std::int64_t base = 0;
    for (int s : family_sides(g, policy)) {
        const int stride = family_stride(policy, s);
        const std::int64_t per_axis = (g.extent - s) / stride + 1;
        if (s == q.side) {
            std::int64_t o0 = q.low[0] / stride;
            if (g.dim == 1) return base + o0;
            return base + o0 * per_axis + q.low[1] / stride;
        }
        base += g.dim == 1 ? per_axis : per_axis * per_axis;
    }
    throw std::invalid_argument("cube ordinal: side not in family");
}

} // namespace maxops
