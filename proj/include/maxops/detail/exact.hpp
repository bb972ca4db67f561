#pragma once

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <utility>

#include "maxops/grid.hpp"

namespace maxops::detail {

using BigInt = boost::multiprecision::cpp_int;

/// Exact rational value; denominator always positive. Used by the
/// zero-tolerance checks, where independently rounded doubles could cross an
/// inequality that the underlying rationals satisfy.
struct Rational {
    BigInt num;
    BigInt den;
};

inline Rational make_rational(BigInt n, BigInt d) {
    if (d < 0) {
        n = -n;
        d = -d;
    }
    return {std::move(n), std::move(d)};
}

/// v = m / 2^d exactly (d may be negative).
struct DyadicDecomp {
    long long m;
    int d;
};

inline DyadicDecomp dyadic_decompose(double v) {
    if (v == 0.0) return {0, 0};
    int e = 0;
    const double fr = std::frexp(v, &e);
    return {static_cast<long long>(std::ldexp(fr, 53)), 53 - e};
}

inline Rational rational_from_double(double v) {
    const DyadicDecomp t = dyadic_decompose(v);
    if (t.d >= 0) return {BigInt(t.m), BigInt(1) << t.d};
    return {BigInt(t.m) << -t.d, 1};
}

inline Rational add(const Rational& a, const Rational& b) {
    return {a.num * b.den + b.num * a.den, a.den * b.den};
}

inline Rational sub(const Rational& a, const Rational& b) {
    return {a.num * b.den - b.num * a.den, a.den * b.den};
}

inline Rational mul(const Rational& a, const Rational& b) {
    return {a.num * b.num, a.den * b.den};
}

inline Rational rational_abs(const Rational& a) {
    return {a.num < 0 ? BigInt(-a.num) : a.num, a.den};
}

inline bool less_equal(const Rational& a, const Rational& b) {
    return a.num * b.den <= b.num * a.den;
}

inline bool less(const Rational& a, const Rational& b) {
    return a.num * b.den < b.num * a.den;
}

/// Exact accumulator for sums of doubles: value = num / 2^k, k >= 0.
struct DyadicSum {
    BigInt num = 0;
    int k = 0;

    void add_term(BigInt m, int d) {
        if (d > k) {
            num <<= d - k;
            k = d;
        } else if (d < k) {
            m <<= k - d;
        }
        num += m;
    }

    void add(double v) {
        const DyadicDecomp t = dyadic_decompose(v);
        add_term(BigInt(t.m), t.d);
    }

    Rational over_count(std::int64_t n) const {
        BigInt den = BigInt(1) << k;
        den *= n;
        return make_rational(num, std::move(den));
    }
};

/// Exact average of |f| over the cube. The grid spacing cancels between
/// integral and volume, leaving a pure rational in the cell values.
inline Rational exact_abs_average(const GridFunction& f, const Cube& q) {
    const Grid& g = f.grid;
    const int hi1 = g.dim == 1 ? q.low[1] + 1 : q.low[1] + q.side;
    DyadicSum s;
    for (int i0 = q.low[0]; i0 < q.low[0] + q.side; ++i0)
        for (int i1 = q.low[1]; i1 < hi1; ++i1) s.add(std::fabs(f.at(i0, i1)));
    return s.over_count(cube_cell_count(g, q));
}

/// Exact average of |f - avg_Q f| over the cube.
inline Rational exact_oscillation_average(const GridFunction& f, const Cube& q) {
    const Grid& g = f.grid;
    const int hi1 = g.dim == 1 ? q.low[1] + 1 : q.low[1] + q.side;
    const std::int64_t n = cube_cell_count(g, q);
    DyadicSum mean_sum;
    int kmax = 0;
    for (int i0 = q.low[0]; i0 < q.low[0] + q.side; ++i0)
        for (int i1 = q.low[1]; i1 < hi1; ++i1) {
            const DyadicDecomp t = dyadic_decompose(f.at(i0, i1));
            mean_sum.add_term(BigInt(t.m), t.d);
            kmax = std::max(kmax, t.d);
        }
    const int kk = std::max(kmax, mean_sum.k);
    // deviation cell: |f_c * n - sum| / (n * 2^kk)
    const BigInt scaled_sum = mean_sum.num << (kk - mean_sum.k);
    BigInt dev = 0;
    for (int i0 = q.low[0]; i0 < q.low[0] + q.side; ++i0)
        for (int i1 = q.low[1]; i1 < hi1; ++i1) {
            const DyadicDecomp t = dyadic_decompose(f.at(i0, i1));
            BigInt term = (BigInt(t.m) << (kk - t.d)) * n - scaled_sum;
            if (term < 0) term = -term;
            dev += term;
        }
    BigInt den = BigInt(1) << kk;
    den *= n;
    den *= n;
    return make_rational(std::move(dev), std::move(den));
}

/// Exact average of |b(x_ref) - b(y)| |f(y)| over the cube's cells y.
inline Rational exact_commutator_average(const GridFunction& b, const GridFunction& f,
                                         int x_ref, const Cube& q) {
    const Grid& g = b.grid;
    const int hi1 = g.dim == 1 ? q.low[1] + 1 : q.low[1] + q.side;
    const DyadicDecomp bx = dyadic_decompose(b.values[static_cast<std::size_t>(x_ref)]);
    DyadicSum s;
    for (int i0 = q.low[0]; i0 < q.low[0] + q.side; ++i0)
        for (int i1 = q.low[1]; i1 < hi1; ++i1) {
            const DyadicDecomp by = dyadic_decompose(b.at(i0, i1));
            const DyadicDecomp fy = dyadic_decompose(f.at(i0, i1));
            const int kb = std::max(bx.d, by.d);
            BigInt diff = (BigInt(bx.m) << (kb - bx.d)) - (BigInt(by.m) << (kb - by.d));
            if (diff < 0) diff = -diff;
            BigInt fmag(fy.m < 0 ? -fy.m : fy.m);
            s.add_term(diff * fmag, kb + fy.d);
        }
    return s.over_count(cube_cell_count(g, q));
}

} // namespace maxops::detail
