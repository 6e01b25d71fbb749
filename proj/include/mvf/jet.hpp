#pragma once

// Jet bundle machinery: connections on E -> M, jet fields on J1E -> M (their
// curvature and the dictionary with decomposable multivector fields), contact
// forms, SOPDE and holonomy checks, sections and prolongation.

#include "mvf/forms.hpp"
#include "mvf/multivector.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace mvf {

namespace detail {

inline void require_vars_within(const Expr& e, const std::set<std::string>& allowed,
                                const char* what) {
    for (const std::string& v : e.variables())
        if (!allowed.count(v))
            throw ChartError(std::string(what) + " depends on undeclared variable '" + v + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Connections on E -> M.

/// Ehresmann connection in coordinates: Gamma^A_mu(x, y).
struct ConnectionE {
    ChartSpec chart;            // chart on E (jet coordinates not required)
    std::vector<Expr> gamma;    // [A][mu] flattened as A*m + mu

    ConnectionE(ChartSpec c, std::vector<Expr> g) : chart(std::move(c)), gamma(std::move(g)) {
        if (gamma.size() != chart.fiber_dim() * chart.m())
            throw ChartError("Gamma must have N*m entries");
        std::set<std::string> allowed;
        for (const auto& n : chart.base()) allowed.insert(n);
        for (const auto& n : chart.fiber()) allowed.insert(n);
        for (const Expr& e : gamma) detail::require_vars_within(e, allowed, "Gamma");
    }

    const Expr& at(std::size_t a, std::size_t mu) const { return gamma[a * chart.m() + mu]; }
};

struct CurvatureE {
    std::size_t fibers = 0, m = 0;
    std::vector<Expr> r;  // [B][mu][eta]

    const Expr& at(std::size_t b, std::size_t mu, std::size_t eta) const {
        return r[(b * m + mu) * m + eta];
    }
    bool flat(const SimplifyConfig& cfg = {}) const {
        for (const Expr& e : r)
            if (!verdict_zero(is_zero(e, cfg))) return false;
        return true;
    }
};

/// R^B_{mu eta} = dGamma^B_eta/dx^mu - dGamma^B_mu/dx^eta
///              + Gamma^A_mu dGamma^B_eta/dy^A - Gamma^A_eta dGamma^B_mu/dy^A.
inline CurvatureE curvature_E(const ConnectionE& c) {
    std::size_t m = c.chart.m(), N = c.chart.fiber_dim();
    CurvatureE out{N, m, std::vector<Expr>(N * m * m, Expr::num(0))};
    for (std::size_t b = 0; b < N; ++b)
        for (std::size_t mu = 0; mu < m; ++mu)
            for (std::size_t eta = 0; eta < m; ++eta) {
                std::vector<Expr> parts;
                parts.push_back(differentiate(c.at(b, eta), c.chart.base()[mu]));
                parts.push_back(-differentiate(c.at(b, mu), c.chart.base()[eta]));
                for (std::size_t a = 0; a < N; ++a) {
                    parts.push_back(c.at(a, mu) * differentiate(c.at(b, eta), c.chart.fiber()[a]));
                    parts.push_back(-(c.at(a, eta) * differentiate(c.at(b, mu), c.chart.fiber()[a])));
                }
                out.r[(b * m + mu) * m + eta] = Expr::sum(std::move(parts));
            }
    return out;
}

// ---------------------------------------------------------------------------
// Jet fields on J1E -> M.

/// Coefficients of a jet field J1E -> J1J1E: F^A_mu(x,y,v), G^A_{mu rho}(x,y,v).
/// G is stored direction-first: G[A][mu][rho] is the d/dv^A_rho coefficient of
/// the direction-mu horizontal field.
struct JetFieldJ1 {
    ChartSpec chart;        // jet chart
    std::vector<Expr> F;    // [A][mu] flattened as A*m + mu
    std::vector<Expr> G;    // [A][mu][rho] flattened as (A*m + mu)*m + rho

    JetFieldJ1(ChartSpec c, std::vector<Expr> f, std::vector<Expr> g)
        : chart(std::move(c)), F(std::move(f)), G(std::move(g)) {
        if (!chart.has_jet()) throw ChartError("jet field needs a jet chart");
        std::size_t m = chart.m(), N = chart.fiber_dim();
        if (F.size() != N * m || G.size() != N * m * m)
            throw ChartError("jet field coefficient arrays have wrong size");
        auto allowed = chart.coordinate_set();
        for (const Expr& e : F) detail::require_vars_within(e, allowed, "F");
        for (const Expr& e : G) detail::require_vars_within(e, allowed, "G");
    }

    std::size_t m() const { return chart.m(); }
    std::size_t fibers() const { return chart.fiber_dim(); }

    const Expr& f_at(std::size_t a, std::size_t mu) const { return F[a * m() + mu]; }
    const Expr& g_at(std::size_t a, std::size_t mu, std::size_t rho) const {
        return G[(a * m() + mu) * m() + rho];
    }

    /// Trivial SOPDE pattern: F = v, G = 0.
    static JetFieldJ1 trivial_sopde(const ChartSpec& chart) {
        std::size_t m = chart.m(), N = chart.fiber_dim();
        std::vector<Expr> f(N * m), g(N * m * m, Expr::num(0));
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t mu = 0; mu < m; ++mu) f[a * m + mu] = Expr::var(chart.jet_name(a, mu));
        return JetFieldJ1(chart, std::move(f), std::move(g));
    }
};

/// Horizontal field of direction mu: d/dx^mu + F^A_mu d/dy^A + G^A_{mu rho} d/dv^A_rho.
inline VectorField horizontal_field(const JetFieldJ1& j, std::size_t mu) {
    VectorField x(j.chart);
    x.set(mu, Expr::num(1));
    for (std::size_t a = 0; a < j.fibers(); ++a) {
        x.set(j.chart.m() + a, j.f_at(a, mu));
        for (std::size_t rho = 0; rho < j.m(); ++rho)
            x.set(j.chart.jet_index(a, rho), j.g_at(a, mu, rho));
    }
    return x;
}

/// Representative multivector field X = X_1 ^ ... ^ X_m of the class of a jet field.
inline DecomposableMVF jetfield_to_mvf(const JetFieldJ1& j) {
    std::vector<VectorField> fs;
    for (std::size_t mu = 0; mu < j.m(); ++mu) fs.push_back(horizontal_field(j, mu));
    return DecomposableMVF(j.chart, std::move(fs));
}

/// Reads (F, G) off a transverse multivector field after normalizing the base
/// block to the identity. Throws when the base block is not invertible.
inline JetFieldJ1 mvf_to_jetfield(const DecomposableMVF& y, const SimplifyConfig& cfg = {}) {
    if (!y.chart.has_jet()) throw ChartError("mvf_to_jetfield needs a jet chart");
    DecomposableMVF n = is_normalized_transverse(y, cfg) ? y : normalize_transverse(y, cfg);
    std::size_t m = y.chart.m(), N = y.chart.fiber_dim();
    std::vector<Expr> f(N * m), g(N * m * m);
    for (std::size_t mu = 0; mu < m; ++mu)
        for (std::size_t a = 0; a < N; ++a) {
            f[a * m + mu] = n.factors[mu].component(m + a);
            for (std::size_t rho = 0; rho < m; ++rho)
                g[(a * m + mu) * m + rho] = n.factors[mu].component(y.chart.jet_index(a, rho));
        }
    return JetFieldJ1(y.chart, std::move(f), std::move(g));
}

// ---------------------------------------------------------------------------
// Curvature of a jet field (both coefficient blocks).

struct CurvatureJ1 {
    std::size_t fibers = 0, m = 0;
    std::vector<Expr> y_block;  // [B][mu][eta]
    std::vector<Expr> v_block;  // [B][rho][mu][eta]

    const Expr& y_at(std::size_t b, std::size_t mu, std::size_t eta) const {
        return y_block[(b * m + mu) * m + eta];
    }
    const Expr& v_at(std::size_t b, std::size_t rho, std::size_t mu, std::size_t eta) const {
        return v_block[((b * m + rho) * m + mu) * m + eta];
    }
    bool flat(const SimplifyConfig& cfg = {}) const {
        for (const Expr& e : y_block)
            if (!verdict_zero(is_zero(e, cfg))) return false;
        for (const Expr& e : v_block)
            if (!verdict_zero(is_zero(e, cfg))) return false;
        return true;
    }
};

/// Coordinate curvature of the connection of a jet field, as the explicit
/// first-derivative formula (independent of the Lie-bracket machinery).
inline CurvatureJ1 curvature_J1(const JetFieldJ1& j) {
    std::size_t m = j.m(), N = j.fibers();
    const ChartSpec& chart = j.chart;
    // Directional derivative along direction mu written out explicitly.
    auto dir = [&](std::size_t mu, const Expr& e) {
        std::vector<Expr> parts;
        parts.push_back(differentiate(e, chart.base()[mu]));
        for (std::size_t a = 0; a < N; ++a) {
            parts.push_back(j.f_at(a, mu) * differentiate(e, chart.fiber()[a]));
            for (std::size_t gamma = 0; gamma < m; ++gamma)
                parts.push_back(j.g_at(a, mu, gamma) * differentiate(e, chart.jet_name(a, gamma)));
        }
        return Expr::sum(std::move(parts));
    };
    CurvatureJ1 out{N, m, std::vector<Expr>(N * m * m, Expr::num(0)),
                    std::vector<Expr>(N * m * m * m, Expr::num(0))};
    for (std::size_t b = 0; b < N; ++b)
        for (std::size_t mu = 0; mu < m; ++mu)
            for (std::size_t eta = 0; eta < m; ++eta) {
                out.y_block[(b * m + mu) * m + eta] =
                    dir(mu, j.f_at(b, eta)) - dir(eta, j.f_at(b, mu));
                for (std::size_t rho = 0; rho < m; ++rho)
                    out.v_block[((b * m + rho) * m + mu) * m + eta] =
                        dir(mu, j.g_at(b, eta, rho)) - dir(eta, j.g_at(b, mu, rho));
            }
    return out;
}

// ---------------------------------------------------------------------------
// Contact forms and SOPDE checks.

/// Generators theta^A = dy^A - v^A_mu dx^mu of the contact module.
inline std::vector<AdaptedForm> contact_forms(const ChartSpec& chart) {
    if (!chart.has_jet()) throw ChartError("contact forms need a jet chart");
    std::vector<AdaptedForm> out;
    for (std::size_t a = 0; a < chart.fiber_dim(); ++a) {
        AdaptedForm th = AdaptedForm::d_coord(chart, chart.m() + a);
        for (std::size_t mu = 0; mu < chart.m(); ++mu) {
            AdaptedForm dx = AdaptedForm::d_coord(chart, mu);
            th = th - dx.scaled(Expr::var(chart.jet_name(a, mu)));
        }
        out.push_back(std::move(th));
    }
    return out;
}

/// theta^A evaluated on a vector field: Y^{y_A} - v^A_mu Y^{x_mu}.
inline Expr contact_pairing(const ChartSpec& chart, std::size_t a, const VectorField& y) {
    std::vector<Expr> parts{y.component(chart.m() + a)};
    for (std::size_t mu = 0; mu < chart.m(); ++mu)
        parts.push_back(-(Expr::var(chart.jet_name(a, mu)) * y.component(mu)));
    return Expr::sum(std::move(parts));
}

struct SopdeReport {
    bool via_F = false;
    bool via_theta = false;
    std::vector<Expr> witnesses;  // nonzero F^A_mu - v^A_mu differences
};

namespace detail {

inline void subsets_of_size(std::size_t n, std::size_t k, std::vector<std::size_t>& scratch,
                            std::size_t start,
                            const std::function<void(const std::vector<std::size_t>&)>& f) {
    if (scratch.size() == k) {
        f(scratch);
        return;
    }
    for (std::size_t i = start; i < n; ++i) {
        scratch.push_back(i);
        subsets_of_size(n, k, scratch, i + 1, f);
        scratch.pop_back();
    }
}

}  // namespace detail

/// SOPDE condition two ways: via the normalized coefficients (F = v) and via
/// the contraction i(theta)X of the raw factors. The two must agree.
inline SopdeReport sopde_check(const DecomposableMVF& y, const SimplifyConfig& cfg = {}) {
    if (!y.chart.has_jet()) throw ChartError("sopde_check needs a jet chart");
    SopdeReport rep;

    // Route 1: normalize and compare F with the jet coordinates.
    JetFieldJ1 j = mvf_to_jetfield(y, cfg);
    rep.via_F = true;
    for (std::size_t a = 0; a < j.fibers(); ++a)
        for (std::size_t mu = 0; mu < j.m(); ++mu) {
            Expr diff = j.f_at(a, mu) - Expr::var(y.chart.jet_name(a, mu));
            if (!verdict_zero(is_zero(diff, cfg))) {
                rep.via_F = false;
                rep.witnesses.push_back(expand_normal(diff, cfg));
            }
        }

    // Route 2: i(theta^A)X on the raw factors. The contraction of a 1-form
    // with the m-vector is the alternating sum of (m-1)-fold wedges; all of
    // its components must vanish.
    rep.via_theta = true;
    std::size_t m = y.m(), dim = y.chart.dim();
    std::vector<std::vector<Expr>> comp(m, std::vector<Expr>(dim));
    for (std::size_t mu = 0; mu < m; ++mu)
        for (std::size_t i = 0; i < dim; ++i) comp[mu][i] = y.factors[mu].component(i);
    for (std::size_t a = 0; a < y.chart.fiber_dim() && rep.via_theta; ++a) {
        std::vector<Expr> pair(m);
        for (std::size_t mu = 0; mu < m; ++mu)
            pair[mu] = contact_pairing(y.chart, a, y.factors[mu]);
        std::vector<std::size_t> scratch;
        bool zero = true;
        detail::subsets_of_size(dim, m - 1, scratch, 0,
                                [&](const std::vector<std::size_t>& cols) {
            if (!zero) return;
            std::vector<Expr> terms;
            for (std::size_t mu = 0; mu < m; ++mu) {
                ExprMatrix minor;
                for (std::size_t nu = 0; nu < m; ++nu) {
                    if (nu == mu) continue;
                    std::vector<Expr> row;
                    for (std::size_t c : cols) row.push_back(comp[nu][c]);
                    minor.push_back(std::move(row));
                }
                Expr det = determinant(minor, cfg);
                Expr t = pair[mu] * det;
                terms.push_back(mu % 2 == 0 ? t : -t);
            }
            if (!verdict_zero(is_zero(Expr::sum(std::move(terms)), cfg))) zero = false;
        });
        if (!zero) rep.via_theta = false;
    }
    return rep;
}

/// Interior product with a decomposable multivector:
/// i(Y1 ^ ... ^ Ym) w = i(Y1) ... i(Ym) w, scaled.
inline AdaptedForm contract(const AdaptedForm& w, const DecomposableMVF& y) {
    AdaptedForm acc = w;
    for (std::size_t mu = y.m(); mu-- > 0;) acc = contract(acc, y.factors[mu]);
    return acc.scaled(y.scale);
}

// ---------------------------------------------------------------------------
// Sections and prolongation.

/// Section of E -> M in coordinates: y^A = f^A(x).
struct Section {
    ChartSpec chart;  // jet chart of the ambient problem
    std::vector<Expr> f;  // [A]

    Section(ChartSpec c, std::vector<Expr> comps) : chart(std::move(c)), f(std::move(comps)) {
        if (f.size() != chart.fiber_dim()) throw ChartError("section needs N components");
        std::set<std::string> allowed(chart.base().begin(), chart.base().end());
        for (const Expr& e : f) detail::require_vars_within(e, allowed, "section");
    }
};

/// Section of J1E -> M: y^A = f^A(x), v^A_mu = g^A_mu(x).
struct JetSection {
    ChartSpec chart;
    std::vector<Expr> f;  // [A]
    std::vector<Expr> g;  // [A][mu]

    JetSection(ChartSpec c, std::vector<Expr> fs, std::vector<Expr> gs)
        : chart(std::move(c)), f(std::move(fs)), g(std::move(gs)) {
        if (f.size() != chart.fiber_dim() || g.size() != chart.fiber_dim() * chart.m())
            throw ChartError("jet section component counts are wrong");
        std::set<std::string> allowed(chart.base().begin(), chart.base().end());
        for (const Expr& e : f) detail::require_vars_within(e, allowed, "jet section");
        for (const Expr& e : g) detail::require_vars_within(e, allowed, "jet section");
    }

    const Expr& g_at(std::size_t a, std::size_t mu) const { return g[a * chart.m() + mu]; }

    /// Substitution y -> f(x), v -> g(x).
    Bindings bindings() const {
        Bindings b;
        for (std::size_t a = 0; a < chart.fiber_dim(); ++a) {
            b[chart.fiber()[a]] = f[a];
            for (std::size_t mu = 0; mu < chart.m(); ++mu)
                b[chart.jet_name(a, mu)] = g_at(a, mu);
        }
        return b;
    }
};

/// j1 phi = (x, f^A, df^A/dx^mu).
inline JetSection prolong_section(const Section& phi) {
    std::vector<Expr> g;
    for (std::size_t a = 0; a < phi.chart.fiber_dim(); ++a)
        for (std::size_t mu = 0; mu < phi.chart.m(); ++mu)
            g.push_back(differentiate(phi.f[a], phi.chart.base()[mu]));
    return JetSection(phi.chart, phi.f, std::move(g));
}

/// Differential replacements for pulling a form back along a jet section:
/// dx^mu stays, dy^A and dv^A_mu become the x-differentials of f and g.
inline std::vector<AdaptedForm> section_differentials(const JetSection& psi) {
    const ChartSpec& chart = psi.chart;
    std::vector<AdaptedForm> diffs;
    for (std::size_t i = 0; i < chart.dim(); ++i) {
        if (chart.is_base_index(i)) {
            diffs.push_back(AdaptedForm::d_coord(chart, i));
            continue;
        }
        Expr comp = i < chart.m() + chart.fiber_dim()
                        ? psi.f[i - chart.m()]
                        : psi.g[i - chart.m() - chart.fiber_dim()];
        AdaptedForm df(chart, 1);
        for (std::size_t mu = 0; mu < chart.m(); ++mu)
            df = df + AdaptedForm::d_coord(chart, mu).scaled(differentiate(comp, chart.base()[mu]));
        diffs.push_back(std::move(df));
    }
    return diffs;
}

/// Pullback of a form along a jet section: coefficients restricted to the
/// section, cobasis replaced by base differentials.
inline AdaptedForm pullback(const AdaptedForm& w, const JetSection& psi) {
    return pullback(w, psi.bindings(), section_differentials(psi));
}

/// Holonomy: g = df/dx, tested directly and through the pullback of the theta
/// generators; the two routes must agree.
inline bool holonomy_check(const JetSection& psi, const SimplifyConfig& cfg = {}) {
    bool direct = true;
    for (std::size_t a = 0; a < psi.chart.fiber_dim(); ++a)
        for (std::size_t mu = 0; mu < psi.chart.m(); ++mu)
            if (!verdict_zero(is_zero(
                    psi.g_at(a, mu) - differentiate(psi.f[a], psi.chart.base()[mu]), cfg)))
                direct = false;

    bool via_theta = true;
    for (const AdaptedForm& th : contact_forms(psi.chart))
        if (!pullback(th, psi).is_zero_form(cfg)) via_theta = false;

    if (direct != via_theta)
        throw Error("holonomy routes disagree");  // equivalent by construction
    return direct;
}

/// Residuals of the integral-section system of a jet field:
///   df^A/dx^mu - F^A_mu o psi   and   dg^A_rho/dx^mu - (d/dv^A_rho part of X_mu) o psi.
struct SectionResiduals {
    std::vector<Expr> first;   // [A][mu]
    std::vector<Expr> second;  // [A][rho][mu]

    bool all_zero(const SimplifyConfig& cfg = {}) const {
        for (const Expr& e : first)
            if (!verdict_zero(is_zero(e, cfg))) return false;
        for (const Expr& e : second)
            if (!verdict_zero(is_zero(e, cfg))) return false;
        return true;
    }
};

inline SectionResiduals integral_section_residual(const JetFieldJ1& j, const JetSection& psi,
                                                  const SimplifyConfig& cfg = {}) {
    if (j.chart != psi.chart) throw ChartError("jet field and section on different charts");
    Bindings bind = psi.bindings();
    SectionResiduals out;
    std::size_t m = j.m();
    for (std::size_t a = 0; a < j.fibers(); ++a)
        for (std::size_t mu = 0; mu < m; ++mu)
            out.first.push_back(expand_normal(
                differentiate(psi.f[a], j.chart.base()[mu]) - substitute(j.f_at(a, mu), bind),
                cfg));
    for (std::size_t a = 0; a < j.fibers(); ++a)
        for (std::size_t rho = 0; rho < m; ++rho)
            for (std::size_t mu = 0; mu < m; ++mu)
                out.second.push_back(expand_normal(differentiate(psi.g_at(a, rho),
                                                                 j.chart.base()[mu]) -
                                                       substitute(j.g_at(a, mu, rho), bind),
                                                   cfg));
    return out;
}

/// Connection variant: residuals df^A/dx^mu - Gamma^A_mu o phi.
inline std::vector<Expr> integral_section_residual(const ConnectionE& c, const Section& phi,
                                                   const SimplifyConfig& cfg = {}) {
    Bindings bind;
    for (std::size_t a = 0; a < c.chart.fiber_dim(); ++a) bind[c.chart.fiber()[a]] = phi.f[a];
    std::vector<Expr> out;
    for (std::size_t a = 0; a < c.chart.fiber_dim(); ++a)
        for (std::size_t mu = 0; mu < c.chart.m(); ++mu)
            out.push_back(expand_normal(
                differentiate(phi.f[a], c.chart.base()[mu]) - substitute(c.at(a, mu), bind), cfg));
    return out;
}

// ---------------------------------------------------------------------------
// SOPDE integrability conditions (curvature-zero system for F = v).

struct SopdeIntegrability {
    std::vector<Expr> symmetry;  // G^B_{eta mu} - G^B_{mu eta}, for mu < eta
    std::vector<Expr> pde;       // X_mu(G^B_{eta rho}) - X_eta(G^B_{mu rho}), mu < eta
};

inline bool is_sopde(const JetFieldJ1& j, const SimplifyConfig& cfg = {}) {
    for (std::size_t a = 0; a < j.fibers(); ++a)
        for (std::size_t mu = 0; mu < j.m(); ++mu)
            if (!verdict_zero(
                    is_zero(j.f_at(a, mu) - Expr::var(j.chart.jet_name(a, mu)), cfg)))
                return false;
    return true;
}

/// The two groups of the curvature-zero system for a SOPDE jet field:
/// Nm(m-1)/2 symmetry relations and Nm^2(m-1)/2 PDE expressions.
inline SopdeIntegrability sopde_integrability_conditions(const JetFieldJ1& j,
                                                         const SimplifyConfig& cfg = {}) {
    if (!is_sopde(j, cfg)) throw ChartError("sopde_integrability_conditions needs a SOPDE field");
    std::size_t m = j.m(), N = j.fibers();
    const ChartSpec& chart = j.chart;
    auto dir = [&](std::size_t mu, const Expr& e) {
        std::vector<Expr> parts;
        parts.push_back(differentiate(e, chart.base()[mu]));
        for (std::size_t a = 0; a < N; ++a) {
            parts.push_back(Expr::var(chart.jet_name(a, mu)) *
                            differentiate(e, chart.fiber()[a]));
            for (std::size_t gamma = 0; gamma < m; ++gamma)
                parts.push_back(j.g_at(a, mu, gamma) * differentiate(e, chart.jet_name(a, gamma)));
        }
        return Expr::sum(std::move(parts));
    };
    SopdeIntegrability out;
    for (std::size_t b = 0; b < N; ++b)
        for (std::size_t mu = 0; mu < m; ++mu)
            for (std::size_t eta = mu + 1; eta < m; ++eta)
                out.symmetry.push_back(j.g_at(b, eta, mu) - j.g_at(b, mu, eta));
    for (std::size_t b = 0; b < N; ++b)
        for (std::size_t rho = 0; rho < m; ++rho)
            for (std::size_t mu = 0; mu < m; ++mu)
                for (std::size_t eta = mu + 1; eta < m; ++eta)
                    out.pde.push_back(dir(mu, j.g_at(b, eta, rho)) - dir(eta, j.g_at(b, mu, rho)));
    return out;
}

}  // namespace mvf
