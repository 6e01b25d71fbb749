#pragma once

// Locally decomposable multivector fields Y = scale * Y_1 ^ ... ^ Y_m on a
// chart, pi-transversality, normalization to the Kronecker base pattern, and
// the involutivity defect [Y_mu, Y_nu] = xi^rho Y_rho + zeta^l Z_l in the
// adapted frame (Z_l = coordinate fields of the non-base coordinates).

#include "mvf/linalg.hpp"
#include "mvf/vector_field.hpp"

#include <vector>

namespace mvf {

struct DecomposableMVF {
    ChartSpec chart;
    std::vector<VectorField> factors;  // exactly m of them
    Expr scale{Expr::num(1)};

    DecomposableMVF() = default;
    DecomposableMVF(ChartSpec c, std::vector<VectorField> fs, Expr s = Expr::num(1))
        : chart(std::move(c)), factors(std::move(fs)), scale(std::move(s)) {
        if (factors.size() != chart.m())
            throw ChartError("factor count must equal the base dimension");
        for (const auto& f : factors)
            if (f.chart() != chart) throw ChartError("factor on a different chart");
    }

    std::size_t m() const { return chart.m(); }

    /// m x m block of base components: row mu, column u.
    ExprMatrix base_block() const {
        ExprMatrix b(m(), std::vector<Expr>(m()));
        for (std::size_t mu = 0; mu < m(); ++mu)
            for (std::size_t u = 0; u < m(); ++u) b[mu][u] = factors[mu].component(u);
        return b;
    }
};

struct TransversalityResult {
    bool transverse = false;
    Verdict verdict = Verdict::ProvenZero;
    Expr witness;  // the determinant of the base block
};

/// pi-transversality: the determinant of the base-component block pairs the
/// multivector with the pullback of a base volume form.
inline TransversalityResult transversality_check(const DecomposableMVF& y,
                                                 const SimplifyConfig& cfg = {}) {
    TransversalityResult r;
    r.witness = determinant(y.base_block(), cfg);
    r.verdict = is_zero(r.witness, cfg);
    r.transverse = !verdict_zero(r.verdict);
    return r;
}

/// True when each factor's base components follow the Kronecker pattern
/// (component u of Y_mu is 1 for u = mu, else 0).
inline bool is_normalized_transverse(const DecomposableMVF& y, const SimplifyConfig& cfg = {}) {
    for (std::size_t mu = 0; mu < y.m(); ++mu)
        for (std::size_t u = 0; u < y.m(); ++u) {
            Expr want = Expr::num(u == mu ? 1 : 0);
            if (is_zero(y.factors[mu].component(u) - want, cfg) != Verdict::ProvenZero)
                return false;
        }
    return true;
}

/// Recombines the factors so the base block becomes the identity; the scale
/// picks up det(B) so the represented multivector is unchanged. Throws when
/// the base block is not invertible as an expression matrix.
inline DecomposableMVF normalize_transverse(const DecomposableMVF& y,
                                            const SimplifyConfig& cfg = {}) {
    ExprMatrix b = y.base_block();
    auto binv = invert(b, cfg);
    if (!binv) throw ChartError("base block is not invertible; field is not transverse");
    std::size_t dim = y.chart.dim();
    std::vector<VectorField> out(y.m(), VectorField(y.chart));
    for (std::size_t mu = 0; mu < y.m(); ++mu)
        for (std::size_t i = 0; i < dim; ++i) {
            std::vector<Expr> parts;
            for (std::size_t nu = 0; nu < y.m(); ++nu)
                parts.push_back((*binv)[mu][nu] * y.factors[nu].component(i));
            out[mu].set(i, expand_normal(Expr::sum(std::move(parts)), cfg));
        }
    return DecomposableMVF(y.chart, std::move(out),
                           expand_normal(y.scale * determinant(b, cfg), cfg));
}

/// Bracket coefficients in the adapted frame {Y_1..Y_m} u {d/d(fiber)}.
/// Requires the normalized Kronecker pattern, which makes extraction a plain
/// component read-off; xi lives on the base slots and zeta on the rest.
class InvolutivityDefect {
public:
    InvolutivityDefect(std::size_t m, std::size_t fiber_count)
        : m_(m), fibers_(fiber_count),
          xi_(m * m * m, Expr::num(0)),
          zeta_(m * m * fiber_count, Expr::num(0)) {}

    const Expr& xi(std::size_t mu, std::size_t nu, std::size_t rho) const {
        return xi_[(mu * m_ + nu) * m_ + rho];
    }
    const Expr& zeta(std::size_t mu, std::size_t nu, std::size_t l) const {
        return zeta_[(mu * m_ + nu) * fibers_ + l];
    }
    Expr& xi(std::size_t mu, std::size_t nu, std::size_t rho) {
        return xi_[(mu * m_ + nu) * m_ + rho];
    }
    Expr& zeta(std::size_t mu, std::size_t nu, std::size_t l) {
        return zeta_[(mu * m_ + nu) * fibers_ + l];
    }

    std::size_t m() const { return m_; }
    std::size_t fiber_count() const { return fibers_; }

    /// All zeta entries vanish (the distribution is involutive on the chart).
    bool involutive(const SimplifyConfig& cfg = {}) const {
        for (const Expr& z : zeta_)
            if (!verdict_zero(is_zero(z, cfg))) return false;
        return true;
    }

private:
    std::size_t m_, fibers_;
    std::vector<Expr> xi_;
    std::vector<Expr> zeta_;
};

inline void require_normalized(const DecomposableMVF& y, const SimplifyConfig& cfg = {}) {
    if (!is_normalized_transverse(y, cfg))
        throw ChartError("multivector field is not in normalized transverse form");
}

inline InvolutivityDefect involutivity_defect(const DecomposableMVF& y,
                                              const SimplifyConfig& cfg = {}) {
    require_normalized(y, cfg);
    std::size_t m = y.m();
    std::size_t fibers = y.chart.dim() - m;
    InvolutivityDefect d(m, fibers);
    for (std::size_t mu = 0; mu < m; ++mu)
        for (std::size_t nu = mu + 1; nu < m; ++nu) {
            VectorField b = lie_bracket(y.factors[mu], y.factors[nu]);
            // In the normalized frame the bracket has no base components, so
            // the Y_rho coefficients are exactly the base components and the
            // Z_l coefficients the remaining ones.
            for (std::size_t rho = 0; rho < m; ++rho) {
                d.xi(mu, nu, rho) = b.component(rho);
                d.xi(nu, mu, rho) = -b.component(rho);
            }
            for (std::size_t l = 0; l < fibers; ++l) {
                d.zeta(mu, nu, l) = b.component(m + l);
                d.zeta(nu, mu, l) = -b.component(m + l);
            }
        }
    return d;
}

}  // namespace mvf
