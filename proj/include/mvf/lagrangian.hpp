#pragma once

// Lagrangian field theory on a jet chart: Poincare-Cartan form coefficients,
// the Hessian regularity criterion, the linear system for the G-coefficients
// of Euler-Lagrange multivector fields, its solution family in the regular
// case, the curvature-zero integrability conditions, the singular-case
// constraint algorithm, and Euler-Lagrange residuals on sections.

#include "mvf/integrability.hpp"
#include "mvf/jet.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mvf {

struct Lagrangian {
    ChartSpec chart;  // jet chart
    Expr density;     // the Lagrangian function of (x, y, v)

    Lagrangian(ChartSpec c, Expr l) : chart(std::move(c)), density(std::move(l)) {
        if (!chart.has_jet()) throw ChartError("Lagrangian needs a jet chart");
        detail::require_vars_within(density, chart.coordinate_set(), "Lagrangian");
    }

    std::size_t m() const { return chart.m(); }
    std::size_t fibers() const { return chart.fiber_dim(); }

    Expr dv(std::size_t a, std::size_t mu) const {
        return differentiate(density, chart.jet_name(a, mu));
    }
    Expr dy(std::size_t a) const { return differentiate(density, chart.fiber()[a]); }
};

// ---------------------------------------------------------------------------
// Poincare-Cartan forms.

struct PCForms {
    AdaptedForm theta;  // degree m
    AdaptedForm omega;  // degree m+1, equal to -d(theta)
};

/// Builds Theta_L and Omega_L from their coordinate tables and verifies the
/// Omega table against -d(Theta) computed by the form engine.
inline PCForms poincare_cartan(const Lagrangian& lag, const SimplifyConfig& cfg = {}) {
    const ChartSpec& chart = lag.chart;
    std::size_t m = lag.m(), N = lag.fibers();

    AdaptedForm theta(chart, static_cast<int>(m));
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t mu = 0; mu < m; ++mu) {
            AdaptedForm dy = AdaptedForm::d_coord(chart, m + a);
            theta = theta + wedge(dy, horizontal_contracted(chart, mu)).scaled(lag.dv(a, mu));
        }
    std::vector<Expr> energy_parts{lag.density};
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t mu = 0; mu < m; ++mu)
            energy_parts.push_back(-(lag.dv(a, mu) * Expr::var(chart.jet_name(a, mu))));
    theta = theta + horizontal_volume(chart).scaled(Expr::sum(std::move(energy_parts)));

    // The coordinate table of Omega_L.
    AdaptedForm omega(chart, static_cast<int>(m) + 1);
    AdaptedForm dmx = horizontal_volume(chart);
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t mu = 0; mu < m; ++mu) {
            AdaptedForm dy_a = AdaptedForm::d_coord(chart, m + a);
            AdaptedForm dx_mu = horizontal_contracted(chart, mu);
            Expr v_amu = Expr::var(chart.jet_name(a, mu));
            for (std::size_t b = 0; b < N; ++b) {
                // d v^B_nu blocks.
                for (std::size_t nu = 0; nu < m; ++nu) {
                    Expr h = differentiate(lag.dv(a, mu), chart.jet_name(b, nu));
                    if (h.is_zero_constant()) continue;
                    AdaptedForm dv_b = AdaptedForm::d_coord(chart, chart.jet_index(b, nu));
                    omega = omega - wedge(dv_b, wedge(dy_a, dx_mu)).scaled(h);
                    omega = omega + wedge(dv_b, dmx).scaled(h * v_amu);
                }
                // d y^B ^ d y^A ^ d^{m-1}x_mu block.
                Expr hy = differentiate(lag.dv(a, mu), chart.fiber()[b]);
                if (!hy.is_zero_constant()) {
                    AdaptedForm dy_b = AdaptedForm::d_coord(chart, m + b);
                    omega = omega - wedge(dy_b, wedge(dy_a, dx_mu)).scaled(hy);
                }
            }
        }
    for (std::size_t b = 0; b < N; ++b) {
        std::vector<Expr> parts{-lag.dy(b)};
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t mu = 0; mu < m; ++mu)
                parts.push_back(differentiate(lag.dv(a, mu), chart.fiber()[b]) *
                                Expr::var(chart.jet_name(a, mu)));
        for (std::size_t mu = 0; mu < m; ++mu)
            parts.push_back(differentiate(lag.dv(b, mu), chart.base()[mu]));
        AdaptedForm dy_b = AdaptedForm::d_coord(chart, m + b);
        omega = omega + wedge(dy_b, dmx).scaled(Expr::sum(std::move(parts)));
    }

    // Cross-check the table against the form engine.
    AdaptedForm minus_dtheta = -exterior_derivative(theta);
    AdaptedForm diff = omega - minus_dtheta;
    for (const auto& [mask, coeff] : diff.terms())
        if (is_zero(coeff, cfg) != Verdict::ProvenZero)
            throw Error("Omega_L table disagrees with -d(Theta_L) on coefficient " + coeff.str());
    return {std::move(theta), std::move(omega)};
}

// ---------------------------------------------------------------------------
// Regularity.

struct Hessian {
    std::size_t fibers = 0, m = 0;
    ExprMatrix h;  // rows/cols indexed by (A, mu) flattened as A*m + mu

    const Expr& at(std::size_t a, std::size_t mu, std::size_t b, std::size_t nu) const {
        return h[a * m + mu][b * m + nu];
    }
};

inline Hessian hessian(const Lagrangian& lag) {
    std::size_t m = lag.m(), N = lag.fibers();
    Hessian out{N, m, ExprMatrix(N * m, std::vector<Expr>(N * m))};
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t mu = 0; mu < m; ++mu)
            for (std::size_t b = 0; b < N; ++b)
                for (std::size_t nu = 0; nu < m; ++nu)
                    out.h[a * m + mu][b * m + nu] =
                        differentiate(lag.dv(a, mu), lag.chart.jet_name(b, nu));
    return out;
}

enum class RegularityVerdict { Regular, Singular, Pointwise };

inline const char* regularity_name(RegularityVerdict v) {
    switch (v) {
        case RegularityVerdict::Regular: return "regular";
        case RegularityVerdict::Singular: return "singular";
        case RegularityVerdict::Pointwise: return "pointwise";
    }
    return "?";
}

struct RegularityResult {
    Hessian hess;
    Expr det;
    RegularityVerdict verdict = RegularityVerdict::Singular;
};

/// Hessian determinant criterion: a nonzero constant determinant certifies
/// regularity on the whole chart; an identically zero one singularity;
/// anything else is a pointwise statement with the determinant attached.
inline RegularityResult regularity(const Lagrangian& lag, const SimplifyConfig& cfg = {}) {
    RegularityResult out;
    out.hess = hessian(lag);
    out.det = determinant(out.hess.h, cfg);
    if (auto c = constant_value(out.det, cfg)) {
        out.verdict = (*c == 0) ? RegularityVerdict::Singular : RegularityVerdict::Regular;
        return out;
    }
    Verdict v = is_zero(out.det, cfg);
    out.verdict = verdict_zero(v) ? RegularityVerdict::Singular : RegularityVerdict::Pointwise;
    return out;
}

// ---------------------------------------------------------------------------
// The Euler-Lagrange linear system for the G-coefficients.

/// Unknowns are labeled G<B>_<nu>_<mu> (1-based); unknown (B, nu, mu)
/// multiplies d2L/dv^B_nu dv^A_mu in equation A and corresponds to the
/// d/dv^B_nu coefficient of the direction-mu horizontal field.
struct ELSystem {
    ChartSpec chart;
    std::size_t fibers = 0, m = 0;
    ExprMatrix coeff;       // N rows x (N m^2) columns
    std::vector<Expr> rhs;  // N entries

    std::size_t unknown_index(std::size_t b, std::size_t nu, std::size_t mu) const {
        return (b * m + nu) * m + mu;
    }
    std::string unknown_name(std::size_t k) const {
        std::size_t mu = k % m, nu = (k / m) % m, b = k / (m * m);
        return "G" + std::to_string(b + 1) + "_" + std::to_string(nu + 1) + "_" +
               std::to_string(mu + 1);
    }
    std::size_t unknown_count() const { return fibers * m * m; }
};

inline ELSystem el_system(const Lagrangian& lag) {
    std::size_t m = lag.m(), N = lag.fibers();
    ELSystem sys{lag.chart, N, m, ExprMatrix(N, std::vector<Expr>(N * m * m, Expr::num(0))),
                 std::vector<Expr>(N)};
    for (std::size_t a = 0; a < N; ++a) {
        for (std::size_t b = 0; b < N; ++b)
            for (std::size_t nu = 0; nu < m; ++nu)
                for (std::size_t mu = 0; mu < m; ++mu)
                    sys.coeff[a][sys.unknown_index(b, nu, mu)] =
                        differentiate(lag.dv(a, mu), lag.chart.jet_name(b, nu));
        std::vector<Expr> parts{lag.dy(a)};
        for (std::size_t mu = 0; mu < m; ++mu)
            parts.push_back(-differentiate(lag.dv(a, mu), lag.chart.base()[mu]));
        for (std::size_t b = 0; b < N; ++b)
            for (std::size_t mu = 0; mu < m; ++mu)
                parts.push_back(-(differentiate(lag.dv(a, mu), lag.chart.fiber()[b]) *
                                  Expr::var(lag.chart.jet_name(b, mu))));
        sys.rhs[a] = Expr::sum(std::move(parts));
    }
    return sys;
}

/// Pre-SOPDE residuals: coefficients on dv^A_nu of the evolution equation,
/// (F^B_mu - v^B_mu) d2L/dv^A_nu dv^B_mu, which force F = v for regular L.
inline std::vector<Expr> sopde_forcing_residuals(const Lagrangian& lag,
                                                 const std::vector<Expr>& F) {
    std::size_t m = lag.m(), N = lag.fibers();
    if (F.size() != N * m) throw ChartError("F needs N*m entries");
    std::vector<Expr> out;
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t nu = 0; nu < m; ++nu) {
            std::vector<Expr> parts;
            for (std::size_t b = 0; b < N; ++b)
                for (std::size_t mu = 0; mu < m; ++mu)
                    parts.push_back((F[b * m + mu] - Expr::var(lag.chart.jet_name(b, mu))) *
                                    differentiate(lag.dv(a, nu), lag.chart.jet_name(b, mu)));
            out.push_back(Expr::sum(std::move(parts)));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Regular case: solve for N pivot unknowns, leaving N(m^2-1) free functions.

struct PivotPolicy {
    // Diagonal policy: pivots are the unknowns (B, mu0, mu0) for every B.
    std::size_t mu0 = 0;
    // Explicit pivot unknown indices (one per equation) override the diagonal.
    std::vector<std::size_t> explicit_pivots;

    static PivotPolicy diagonal(std::size_t mu0 = 0) { return {mu0, {}}; }
};

struct ELSolutionFamily {
    ELSystem sys;
    std::vector<std::size_t> pivots;       // unknown indices, one per equation
    std::vector<Expr> pivot_exprs;         // chart vars + free parameter names
    std::vector<std::size_t> free;         // remaining unknown indices
    std::vector<std::string> free_names;   // parameter names, aligned with free
    std::vector<Expr> homogeneous;         // Hessian rows applied to g-parameters

    std::size_t free_count() const { return free.size(); }

    /// Full unknown assignment: free unknowns from the map (name -> Expr, all
    /// required), pivots by substitution. Returns values indexed like the
    /// system unknowns.
    std::vector<Expr> instantiate(const Bindings& assignment) const {
        for (const std::string& name : free_names)
            if (!assignment.count(name))
                throw Error("assignment missing free unknown '" + name + "'");
        std::vector<Expr> values(sys.unknown_count(), Expr::num(0));
        for (std::size_t i = 0; i < free.size(); ++i)
            values[free[i]] = assignment.at(free_names[i]);
        for (std::size_t i = 0; i < pivots.size(); ++i)
            values[pivots[i]] = expand_normal(substitute(pivot_exprs[i], assignment));
        return values;
    }

    /// SOPDE jet field carrying the instantiated G array: the unknown
    /// (B, nu, mu) value becomes the d/dv^B_nu coefficient of direction mu.
    JetFieldJ1 jet_field(const Bindings& assignment) const {
        std::vector<Expr> values = instantiate(assignment);
        std::size_t m = sys.m, N = sys.fibers;
        JetFieldJ1 j = JetFieldJ1::trivial_sopde(sys.chart);
        std::vector<Expr> g(N * m * m);
        for (std::size_t b = 0; b < N; ++b)
            for (std::size_t nu = 0; nu < m; ++nu)
                for (std::size_t mu = 0; mu < m; ++mu)
                    g[(b * m + mu) * m + nu] = values[sys.unknown_index(b, nu, mu)];
        return JetFieldJ1(sys.chart, j.F, std::move(g));
    }
};

inline ELSolutionFamily solve_regular(const ELSystem& sys, const Hessian& hess,
                                      const PivotPolicy& policy = {},
                                      const SimplifyConfig& cfg = {}) {
    std::size_t N = sys.fibers, m = sys.m;
    // Precondition: the Lagrangian is regular (full Hessian determinant is a
    // nonzero constant); degenerate systems belong to the singular algorithm.
    Expr hdet = determinant(hess.h, cfg);
    auto hc = constant_value(hdet, cfg);
    if (!hc || *hc == 0)
        throw Error("singular system passed to solve_regular");
    std::vector<std::size_t> pivots;
    if (!policy.explicit_pivots.empty()) {
        if (policy.explicit_pivots.size() != N)
            throw Error("explicit pivot policy needs one unknown per equation");
        pivots = policy.explicit_pivots;
    } else {
        if (policy.mu0 >= m) throw Error("pivot policy index out of range");
        for (std::size_t b = 0; b < N; ++b)
            pivots.push_back(sys.unknown_index(b, policy.mu0, policy.mu0));
    }

    // Pivot submatrix must be invertible (its determinant's nonzero verdict
    // is the regularity hypothesis restricted to the chosen columns).
    ExprMatrix pm(N, std::vector<Expr>(N));
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = 0; b < N; ++b) pm[a][b] = sys.coeff[a][pivots[b]];
    Expr det = determinant(pm, cfg);
    if (verdict_zero(is_zero(det, cfg)))
        throw Error("singular system passed to solve_regular (pivot block determinant vanishes)");
    auto inv = invert(pm, cfg);
    if (!inv) throw Error("singular system passed to solve_regular");

    ELSolutionFamily fam;
    fam.sys = sys;
    fam.pivots = pivots;
    for (std::size_t k = 0; k < sys.unknown_count(); ++k)
        if (std::find(pivots.begin(), pivots.end(), k) == pivots.end()) {
            fam.free.push_back(k);
            fam.free_names.push_back(sys.unknown_name(k));
        }

    // rhs minus the contribution of the free columns carrying parameter names.
    std::vector<Expr> reduced_rhs;
    for (std::size_t a = 0; a < N; ++a) {
        std::vector<Expr> parts{sys.rhs[a]};
        for (std::size_t i = 0; i < fam.free.size(); ++i)
            parts.push_back(-(sys.coeff[a][fam.free[i]] * Expr::var(fam.free_names[i])));
        reduced_rhs.push_back(Expr::sum(std::move(parts)));
    }
    fam.pivot_exprs = mat_vec(*inv, reduced_rhs, cfg);

    // Residual of the family must vanish identically in the parameters.
    Bindings names_as_params;
    for (const std::string& n : fam.free_names) names_as_params[n] = Expr::var(n);
    std::vector<Expr> values = fam.instantiate(names_as_params);
    for (std::size_t a = 0; a < N; ++a) {
        std::vector<Expr> parts{-sys.rhs[a]};
        for (std::size_t k = 0; k < sys.unknown_count(); ++k)
            parts.push_back(sys.coeff[a][k] * values[k]);
        if (is_zero(Expr::sum(std::move(parts)), cfg) != Verdict::ProvenZero)
            throw Error("solve_regular produced a non-solution (internal error)");
    }

    // Homogeneous relations: Hessian-arranged rows applied to g-parameters.
    for (std::size_t a = 0; a < N; ++a) {
        std::vector<Expr> parts;
        for (std::size_t k = 0; k < sys.unknown_count(); ++k)
            parts.push_back(sys.coeff[a][k] * Expr::var("g" + sys.unknown_name(k).substr(1)));
        fam.homogeneous.push_back(Expr::sum(std::move(parts)));
    }
    return fam;
}

// ---------------------------------------------------------------------------
// Integrability residuals for an instantiated Euler-Lagrange family member.

struct ELIntegrabilityReport {
    SopdeIntegrability conditions;  // symmetry + pde residuals
    std::vector<Expr> el_residual;  // the linear system residual (should be 0)

    bool all_zero(const SimplifyConfig& cfg = {}) const {
        for (const Expr& e : conditions.symmetry)
            if (!verdict_zero(is_zero(e, cfg))) return false;
        for (const Expr& e : conditions.pde)
            if (!verdict_zero(is_zero(e, cfg))) return false;
        for (const Expr& e : el_residual)
            if (!verdict_zero(is_zero(e, cfg))) return false;
        return true;
    }
};

/// Instantiates the family, builds the SOPDE jet field and returns the
/// curvature-zero residuals plus the evolution-equation residual. All zero
/// certifies an integrable Euler-Lagrange multivector field on the chart.
inline ELIntegrabilityReport el_integrability_conditions(const Lagrangian& lag,
                                                         const ELSolutionFamily& fam,
                                                         const Bindings& assignment,
                                                         const SimplifyConfig& cfg = {}) {
    JetFieldJ1 j = fam.jet_field(assignment);
    ELIntegrabilityReport rep;
    rep.conditions = sopde_integrability_conditions(j, cfg);
    std::vector<Expr> values = fam.instantiate(assignment);
    for (std::size_t a = 0; a < fam.sys.fibers; ++a) {
        std::vector<Expr> parts{-fam.sys.rhs[a]};
        for (std::size_t k = 0; k < fam.sys.unknown_count(); ++k)
            parts.push_back(fam.sys.coeff[a][k] * values[k]);
        rep.el_residual.push_back(expand_normal(Expr::sum(std::move(parts)), cfg));
    }
    (void)lag;
    return rep;
}

// ---------------------------------------------------------------------------
// Euler-Lagrange residual on a section.

/// (dL/dy^A) o j1(phi) - d/dx^mu [ (dL/dv^A_mu) o j1(phi) ]; the total
/// derivative acts after substitution, so no second-jet coordinates appear.
inline std::vector<Expr> el_residual_on_section(const Lagrangian& lag, const Section& phi,
                                                const SimplifyConfig& cfg = {}) {
    JetSection j1 = prolong_section(phi);
    Bindings bind = j1.bindings();
    std::vector<Expr> out;
    for (std::size_t a = 0; a < lag.fibers(); ++a) {
        std::vector<Expr> parts{substitute(lag.dy(a), bind)};
        for (std::size_t mu = 0; mu < lag.m(); ++mu)
            parts.push_back(
                -differentiate(substitute(lag.dv(a, mu), bind), lag.chart.base()[mu]));
        out.push_back(expand_normal(Expr::sum(std::move(parts)), cfg));
    }
    return out;
}

}  // namespace mvf
