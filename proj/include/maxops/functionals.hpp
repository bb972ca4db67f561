#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "maxops/grid.hpp"
#include "maxops/operators.hpp"
#include "maxops/weights.hpp"

namespace maxops {

/// Exponent tuple (dim, beta, p, q, kappa, r). q is always derived from
/// 1/q = 1/p - beta/dim, never set directly.
struct ExponentConfig {
    int dim = 1;
    double beta = 0.5;
    double p = 1.5;
    double q = 6.0;
    double kappa = 0.125;
    double r = 1.25;

    static ExponentConfig make(int dim, double beta, double p, double kappa, double r) {
        if (dim != 1 && dim != 2) throw std::invalid_argument("exponents: dim must be 1 or 2");
        for (double v : {beta, p, kappa, r})
            if (!std::isfinite(v)) throw std::invalid_argument("exponents: values must be finite");
        if (!(beta > 0.0 && beta < 1.0))
            throw std::invalid_argument("exponents: beta must lie in (0, 1)");
        if (!(p > 1.0 && p < dim / beta))
            throw std::invalid_argument("exponents: p must lie in (1, dim/beta)");
        const double q = dim * p / (dim - beta * p);
        if (!(kappa > 0.0 && kappa < p / q))
            throw std::invalid_argument("exponents: kappa must lie in (0, p/q)");
        if (!(r > 1.0 && r < p)) throw std::invalid_argument("exponents: r must lie in (1, p)");
        return ExponentConfig{dim, beta, p, q, kappa, r};
    }

    static ExponentConfig default_for_dim(int dim) {
        if (dim == 1) return make(1, 0.5, 1.5, 0.125, 1.25);
        if (dim == 2) return make(2, 0.5, 2.0, 0.25, 1.5);
        throw std::invalid_argument("exponents: dim must be 1 or 2");
    }
};

/// Value of a sup-type norm together with the cube attaining the sup.
struct NormValue {
    double value = 0.0;
    Cube witness;
};

inline double infinite_exponent() { return std::numeric_limits<double>::infinity(); }

// Canonical scalar forms for every functional. Each term is evaluated in
// exactly one way so independent paths can be compared bit for bit.
inline double morrey_term(double integral_u, double v_measure, double p, double kappa) {
    return std::pow(integral_u / std::pow(v_measure, kappa), 1.0 / p);
}

inline double lipschitz_prefactor(double mu_measure, double beta, int dim) {
    return std::pow(mu_measure, -beta / dim);
}

inline double power_mean_from_cell_sum(double cell_sum, const Grid& g, double mu_measure,
                                       double p) {
    return std::pow(integral_from_cell_sum(cell_sum, g) / mu_measure, 1.0 / p);
}

namespace detail {

inline Cube whole_grid_cube(const Grid& g) { return Cube{{0, 0}, g.extent}; }

/// Sum of term(linear) over the cells of a cube, ascending lexicographic
/// cell order. Shared by every functional so orderings never diverge.
template <typename CellTerm>
double cube_term_sum(const Grid& g, const Cube& q, CellTerm&& term) {
    double s = 0.0;
    if (g.dim == 1) {
        for (int i0 = q.low[0]; i0 < q.low[0] + q.side; ++i0) s += term(i0);
    } else {
        for (int i0 = q.low[0]; i0 < q.low[0] + q.side; ++i0)
            for (int i1 = q.low[1]; i1 < q.low[1] + q.side; ++i1) s += term(g.linear_index(i0, i1));
    }
    return s;
}

template <typename CellValue>
double cube_cell_max(const Grid& g, const Cube& q, CellValue&& value) {
    double m = -std::numeric_limits<double>::infinity();
    if (g.dim == 1) {
        for (int i0 = q.low[0]; i0 < q.low[0] + q.side; ++i0) m = std::max(m, value(i0));
    } else {
        for (int i0 = q.low[0]; i0 < q.low[0] + q.side; ++i0)
            for (int i1 = q.low[1]; i1 < q.low[1] + q.side; ++i1)
                m = std::max(m, value(g.linear_index(i0, i1)));
    }
    return m;
}

/// Sup over the family, first cube wins ties.
template <typename TermOfCube>
NormValue family_sup(const CubeFamily& fam, TermOfCube&& term) {
    if (fam.cubes.empty()) throw std::invalid_argument("norm: cube family is empty");
    NormValue best{-std::numeric_limits<double>::infinity(), fam.cubes.front()};
    for (const Cube& q : fam.cubes) {
        const double t = term(q);
        if (t > best.value) best = NormValue{t, q};
    }
    return best;
}

inline void require_exponent(double p, const char* what) {
    if (!std::isfinite(p) || !(p >= 1.0))
        throw std::invalid_argument(std::string(what) + ": exponent must be finite and >= 1");
}

} // namespace detail

/// (integral of |f|^p mu)^(1/p) over the whole domain.
inline NormValue lebesgue_norm(const GridFunction& f, const Weight& mu, double p) {
    require_same_grid(f.grid, mu.grid(), "lebesgue norm");
    detail::require_exponent(p, "lebesgue norm");
    double s = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        s += std::pow(std::fabs(f.values[i]), p) * mu.value(int(i));
    const double value = std::pow(integral_from_cell_sum(s, f.grid), 1.0 / p);
    return NormValue{value, detail::whole_grid_cube(f.grid)};
}

/// Two-weight Morrey norm: sup_Q ( v(Q)^(-kappa) * integral_Q |f|^p u )^(1/p).
inline NormValue morrey_norm(const GridFunction& f, const Weight& u, const Weight& v, double p,
                             double kappa, const CubeFamily& fam) {
    require_same_grid(f.grid, u.grid(), "morrey norm");
    require_same_grid(f.grid, v.grid(), "morrey norm");
    detail::require_exponent(p, "morrey norm");
    if (!(kappa > 0.0 && kappa < 1.0))
        throw std::invalid_argument("morrey norm: kappa must lie in (0, 1)");
    GridFunction dens = f;
    for (std::size_t i = 0; i < dens.values.size(); ++i)
        dens.values[i] = std::pow(std::fabs(f.values[i]), p) * u.value(int(i));
    const PrefixTable table(dens);
    return detail::family_sup(fam, [&](const Cube& q) {
        return morrey_term(table.integral(q), v.measure(q), p, kappa);
    });
}

inline NormValue morrey_norm(const GridFunction& f, const Weight& mu, double p, double kappa,
                             const CubeFamily& fam) {
    return morrey_norm(f, mu, mu, p, kappa, fam);
}

/// Weighted Lipschitz seminorm of order beta. The cube mean b_Q is the
/// unweighted average; the weight enters only through mu^(1-p) in the
/// integrand and the mu(Q) factors. Pass infinite_exponent() for p = infinity,
/// which replaces the power mean by max over cells of |b - b_Q| / mu.
inline NormValue lipschitz_norm(const GridFunction& b, const Weight& mu, double beta, double p,
                                const CubeFamily& fam) {
    require_same_grid(b.grid, mu.grid(), "lipschitz norm");
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("lipschitz norm: beta must lie in (0, 1)");
    const bool sup_form = std::isinf(p) && p > 0.0;
    if (!sup_form) detail::require_exponent(p, "lipschitz norm");
    const Grid& g = b.grid;
    const PrefixTable table(b);
    return detail::family_sup(fam, [&](const Cube& q) {
        const double mean = table.average(q);
        const double m_q = mu.measure(q);
        const double pre = lipschitz_prefactor(m_q, beta, g.dim);
        if (sup_form) {
            const double peak = detail::cube_cell_max(g, q, [&](int c) {
                return std::fabs(b.values[c] - mean) / mu.value(c);
            });
            return pre * peak;
        }
        const double s = detail::cube_term_sum(g, q, [&](int c) {
            return std::pow(std::fabs(b.values[c] - mean), p) * std::pow(mu.value(c), 1.0 - p);
        });
        return pre * power_mean_from_cell_sum(s, g, m_q, p);
    });
}

/// sup_Q mu(Q)^(-beta/dim) * ( mu(Q)^(-1) * integral_Q |b - b_Q| dx ).
/// Algebraically identical to lipschitz_norm with p = 1; computed without
/// the p = 1 power calls so the equality is a real cross check.
inline NormValue lip1_proof_functional(const GridFunction& b, const Weight& mu, double beta,
                                       const CubeFamily& fam) {
    require_same_grid(b.grid, mu.grid(), "lip1 functional");
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("lip1 functional: beta must lie in (0, 1)");
    const Grid& g = b.grid;
    const PrefixTable table(b);
    return detail::family_sup(fam, [&](const Cube& q) {
        const double mean = table.average(q);
        const double m_q = mu.measure(q);
        const double s =
            detail::cube_term_sum(g, q, [&](int c) { return std::fabs(b.values[c] - mean); });
        return lipschitz_prefactor(m_q, beta, g.dim) * (integral_from_cell_sum(s, g) / m_q);
    });
}

/// sup_Q mu(Q)^(-beta/dim) * ( mu(Q)^(-1) * integral_Q |b - M_Q(b)|^s mu^(1-s) )^(1/s),
/// with M_Q(b) the maximal function restricted to subcubes of Q.
inline NormValue char_functional_M(const GridFunction& b, const Weight& mu,
                                   const ExponentConfig& cfg, double s, const CubeFamily& fam) {
    require_same_grid(b.grid, mu.grid(), "char functional");
    detail::require_exponent(s, "char functional");
    if (cfg.dim != b.grid.dim) throw std::invalid_argument("char functional: dim mismatch");
    const Grid& g = b.grid;
    return detail::family_sup(fam, [&](const Cube& q) {
        const OperatorOutput local = local_maximal(b, q, fam);
        const double m_q = mu.measure(q);
        const double sum = detail::cube_term_sum(g, q, [&](int c) {
            return std::pow(std::fabs(b.values[c] - local.field.values[c]), s) *
                   std::pow(mu.value(c), 1.0 - s);
        });
        return lipschitz_prefactor(m_q, cfg.beta, g.dim) *
               power_mean_from_cell_sum(sum, g, m_q, s);
    });
}

/// Same shape with |b - 2 M#(b chi_Q)|, the sharp function taken over the
/// full grid.
inline NormValue char_functional_sharp(const GridFunction& b, const Weight& mu,
                                       const ExponentConfig& cfg, double s,
                                       const CubeFamily& fam) {
    require_same_grid(b.grid, mu.grid(), "char functional");
    detail::require_exponent(s, "char functional");
    if (cfg.dim != b.grid.dim) throw std::invalid_argument("char functional: dim mismatch");
    const Grid& g = b.grid;
    return detail::family_sup(fam, [&](const Cube& q) {
        const OperatorOutput sharp = sharp_maximal(pointwise_product(b, indicator(g, q)), fam);
        const double m_q = mu.measure(q);
        const double sum = detail::cube_term_sum(g, q, [&](int c) {
            return std::pow(std::fabs(b.values[c] - 2.0 * sharp.field.values[c]), s) *
                   std::pow(mu.value(c), 1.0 - s);
        });
        return lipschitz_prefactor(m_q, cfg.beta, g.dim) *
               power_mean_from_cell_sum(sum, g, m_q, s);
    });
}

/// Witness for the mean-oscillation envelope: the cube and cell where
/// |b(x) - b_Q| / ( w(Q)^(beta/dim) * w(x) ) peaks.
struct EnvelopeReport {
    double constant = 0.0;
    Cube cube;
    int cell = 0;
};

/// Peak of |b(x) - b_Q| / ( w(Q)^(beta/dim) * w(x) ) over all cubes and
/// cells, normalized by the Lipschitz seminorm at p = 1. Empty when the
/// seminorm vanishes, since the ratio is undefined for constant b.
inline std::optional<EnvelopeReport> oscillation_envelope_constant(const GridFunction& b,
                                                                   const Weight& w, double beta,
                                                                   const CubeFamily& fam) {
    require_same_grid(b.grid, w.grid(), "oscillation envelope");
    const double norm = lipschitz_norm(b, w, beta, 1.0, fam).value;
    if (!(norm > 0.0)) return std::nullopt;
    const Grid& g = b.grid;
    const PrefixTable table(b);
    EnvelopeReport best{-1.0, fam.cubes.front(), 0};
    for (const Cube& q : fam.cubes) {
        const double mean = table.average(q);
        const double scale = std::pow(w.measure(q), beta / g.dim);
        const CellBox box = box_of(g, q);
        for (int i0 = box.lo[0]; i0 < box.hi[0]; ++i0)
            for (int i1 = box.lo[1]; i1 < box.hi[1]; ++i1) {
                const int c = g.linear_index(i0, i1);
                const double ratio = std::fabs(b.values[c] - mean) / (scale * w.value(c));
                if (ratio > best.constant) best = EnvelopeReport{ratio, q, c};
            }
    }
    best.constant /= norm;
    return best;
}

} // namespace maxops
