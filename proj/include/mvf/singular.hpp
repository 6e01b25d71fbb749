#pragma once

// Constraint algorithm for singular Lagrangians: compatibility of the linear
// G-system by symbolic row reduction (rank deficiencies turn into constraint
// functions), then the tangency condition level by level. Tangency residuals
// that still contain free solution parameters fix parameters instead of
// cutting points (the existential quantifier in the submanifold definition);
// parameter-free residuals become new constraints.

#include "mvf/lagrangian.hpp"

#include <string>
#include <vector>

namespace mvf {

enum class SingularVerdict { FinalSubmanifold, NoSolution, Inconclusive };

inline const char* singular_verdict_name(SingularVerdict v) {
    switch (v) {
        case SingularVerdict::FinalSubmanifold: return "final-submanifold";
        case SingularVerdict::NoSolution: return "no-solution";
        case SingularVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

enum class SingularMode { SopdeFirst, ConstraintFirst };

struct SingularOptions {
    int depth_bound = 10;
    SingularMode mode = SingularMode::SopdeFirst;
};

struct SingularLevel {
    int level = 0;  // 1 = compatibility, >= 2 tangency
    std::vector<Constraint> added;
    std::vector<std::string> fixed_parameters;  // human-readable "name = expr"
};

struct SingularState {
    SingularVerdict verdict = SingularVerdict::Inconclusive;
    ConstraintSet constraints;
    std::vector<SingularLevel> levels;
    std::vector<std::string> free_parameters;
    Bindings parameter_values;  // solved pivots and tangency-fixed parameters
    Confidence confidence = Confidence::Proven;
    std::vector<std::string> assumptions;
    std::string note;
};

namespace detail {

/// Linear solve of `e` for one parameter with a nonzero-verdict coefficient.
inline std::optional<std::pair<std::string, Expr>> solve_for_parameter(
    const Expr& e, const std::vector<std::string>& params, const SimplifyConfig& cfg) {
    VarTable vars;
    for (const std::string& v : e.variables()) vars.intern(v, false);
    Frac f;
    try {
        f = to_rnf(e, vars, cfg.budget());
    } catch (const BudgetExceeded&) {
        return std::nullopt;
    }
    if (!f.den.is_constant() || vars.any_atom(f.num)) return std::nullopt;
    for (const std::string& p : params) {
        int id = -1;
        for (int v : f.num.variable_ids())
            if (vars.name(v) == p) id = v;
        if (id < 0) continue;
        if (f.num.degree_in(id) != 1) continue;
        std::vector<Poly> cs = f.num.coefficients_in(id);
        Expr coeff = poly_to_expr(cs[1], vars);
        if (verdict_zero(is_zero(coeff, cfg))) continue;
        Expr rest = poly_to_expr(cs[0], vars);
        return std::make_pair(p, expand_normal(-(rest / coeff), cfg));
    }
    return std::nullopt;
}

}  // namespace detail

/// The singular-case algorithm. Precondition: the regularity verdict is
/// singular or pointwise (a regular system belongs to solve_regular).
inline SingularState singular_algorithm(const Lagrangian& lag, const SingularOptions& opts = {},
                                        const SimplifyConfig& cfg = {}) {
    RegularityResult reg = regularity(lag, cfg);
    if (reg.verdict == RegularityVerdict::Regular)
        throw Error("singular_algorithm called on a regular Lagrangian");

    SingularState st;
    st.assumptions.push_back(
        "every S_i is assumed to be a closed submanifold projecting onto M (unverified)");

    ELSystem sys = el_system(lag);
    std::size_t m = sys.m, N = sys.fibers;
    std::size_t n_unknowns = sys.unknown_count();
    std::vector<std::string> coords = lag.chart.coordinates();

    // Optional first phase of the two-step mode: consistency of the joint
    // system in (Delta, G) before the SOPDE condition is imposed.
    if (opts.mode == SingularMode::ConstraintFirst) {
        std::size_t n_delta = N * m;
        ExprMatrix aug(N, std::vector<Expr>(n_delta + n_unknowns + 1, Expr::num(0)));
        for (std::size_t a = 0; a < N; ++a) {
            for (std::size_t b = 0; b < N; ++b)
                for (std::size_t mu = 0; mu < m; ++mu)
                    aug[a][b * m + mu] =
                        differentiate(differentiate(lag.density, lag.chart.fiber()[a]),
                                      lag.chart.jet_name(b, mu)) -
                        differentiate(lag.dv(a, mu), lag.chart.fiber()[b]);
            for (std::size_t k = 0; k < n_unknowns; ++k)
                aug[a][n_delta + k] = sys.coeff[a][k];
            aug[a][n_delta + n_unknowns] = sys.rhs[a];
        }
        // Rows of the dv-coefficient group: Hessian times Delta must vanish.
        Hessian hh = hessian(lag);
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t nu = 0; nu < m; ++nu) {
                std::vector<Expr> row(n_delta + n_unknowns + 1, Expr::num(0));
                for (std::size_t b = 0; b < N; ++b)
                    for (std::size_t mu = 0; mu < m; ++mu) row[b * m + mu] = hh.at(a, nu, b, mu);
                aug.push_back(std::move(row));
            }
        Elimination pre = eliminate(std::move(aug), n_delta + n_unknowns, cfg);
        st.confidence = combine(st.confidence, pre.confidence);
        SingularLevel lvl;
        lvl.level = 1;
        for (std::size_t r = pre.rank; r < pre.rows.size(); ++r) {
            const Expr& rhs = pre.rows[r][n_delta + n_unknowns];
            Verdict v = is_zero(rhs, cfg);
            st.confidence = combine(st.confidence, confidence_of(v));
            if (verdict_zero(v)) continue;
            if (st.constraints.add(rhs, "compatibility (pre-SOPDE)", cfg))
                lvl.added.push_back(st.constraints.items().back());
        }
        if (!lvl.added.empty()) st.levels.push_back(std::move(lvl));
    }

    // Compatibility of the SOPDE-imposed linear system.
    ExprMatrix aug(N, std::vector<Expr>(n_unknowns + 1));
    for (std::size_t a = 0; a < N; ++a) {
        for (std::size_t k = 0; k < n_unknowns; ++k) aug[a][k] = sys.coeff[a][k];
        aug[a][n_unknowns] = sys.rhs[a];
    }
    Elimination elim = eliminate(std::move(aug), n_unknowns, cfg);
    st.confidence = combine(st.confidence, elim.confidence);

    SingularLevel level1;
    level1.level = 1;
    for (std::size_t r = elim.rank; r < elim.rows.size(); ++r) {
        const Expr& rhs = elim.rows[r][n_unknowns];
        Verdict v = is_zero(rhs, cfg);
        st.confidence = combine(st.confidence, confidence_of(v));
        if (verdict_zero(v)) continue;
        if (auto c = constant_value(rhs, cfg); c && *c != 0) {
            st.verdict = SingularVerdict::NoSolution;
            st.note = "compatibility requires the nonzero constant " + rational_str(*c) + " = 0";
            st.constraints.add(rhs, "compatibility", cfg);
            level1.added = st.constraints.items();
            st.levels.push_back(std::move(level1));
            return st;
        }
        if (st.constraints.add(rhs, "compatibility", cfg))
            level1.added.push_back(st.constraints.items().back());
    }

    // Parametrized solution on S_1: pivots from the reduced rows, the other
    // unknowns stay free as named parameters.
    std::vector<bool> is_pivot(n_unknowns, false);
    std::vector<Expr> values(n_unknowns);
    for (std::size_t k = 0; k < n_unknowns; ++k) values[k] = Expr::var(sys.unknown_name(k));
    for (std::size_t r = 0; r < elim.rank; ++r) {
        std::size_t pc = static_cast<std::size_t>(elim.pivot_cols[r]);
        is_pivot[pc] = true;
        std::vector<Expr> parts{elim.rows[r][n_unknowns]};
        for (std::size_t k = 0; k < n_unknowns; ++k) {
            if (k == pc) continue;
            parts.push_back(-(elim.rows[r][k] * Expr::var(sys.unknown_name(k))));
        }
        Expr val = expand_normal(Expr::sum(std::move(parts)), cfg);
        values[pc] = val;
        st.parameter_values[sys.unknown_name(pc)] = val;
    }
    std::vector<std::string> free_params;
    for (std::size_t k = 0; k < n_unknowns; ++k)
        if (!is_pivot[k]) free_params.push_back(sys.unknown_name(k));
    if (!level1.added.empty()) st.levels.push_back(std::move(level1));

    // Tangency levels. X_mu(zeta) with F = v and the parametrized G.
    auto tangency_expr = [&](const Expr& zeta, std::size_t mu) {
        std::vector<Expr> parts{differentiate(zeta, lag.chart.base()[mu])};
        for (std::size_t a = 0; a < N; ++a) {
            parts.push_back(Expr::var(lag.chart.jet_name(a, mu)) *
                            differentiate(zeta, lag.chart.fiber()[a]));
            for (std::size_t rho = 0; rho < m; ++rho)
                parts.push_back(values[sys.unknown_index(a, rho, mu)] *
                                differentiate(zeta, lag.chart.jet_name(a, rho)));
        }
        return Expr::sum(std::move(parts));
    };

    std::vector<Expr> frontier;
    for (const auto& c : st.constraints.items()) frontier.push_back(c.expr);

    for (int level = 2; level <= opts.depth_bound + 1; ++level) {
        if (frontier.empty()) break;
        ConstraintReducer reducer(st.constraints, coords, cfg);
        SingularLevel lvl;
        lvl.level = level;
        bool fixed_any = false;
        for (const Expr& zeta : frontier) {
            for (std::size_t mu = 0; mu < m; ++mu) {
                Expr t = reducer.reduce(tangency_expr(zeta, mu));
                Verdict v = is_zero(t, cfg);
                st.confidence = combine(st.confidence, confidence_of(v));
                if (verdict_zero(v)) continue;
                // Try to absorb the residual into a free parameter first.
                auto fix = detail::solve_for_parameter(t, free_params, cfg);
                if (fix) {
                    Bindings b{{fix->first, fix->second}};
                    for (auto& val : values) val = expand_normal(substitute(val, b), cfg);
                    for (auto& [name, val] : st.parameter_values)
                        val = expand_normal(substitute(val, b), cfg);
                    st.parameter_values[fix->first] = fix->second;
                    free_params.erase(
                        std::find(free_params.begin(), free_params.end(), fix->first));
                    lvl.fixed_parameters.push_back(fix->first + " = " + fix->second.str());
                    fixed_any = true;
                    continue;
                }
                bool has_param = false;
                for (const std::string& p : free_params)
                    if (t.variables().count(p)) has_param = true;
                if (has_param) {
                    st.verdict = SingularVerdict::Inconclusive;
                    st.note = "tangency residual not linearly solvable for a parameter: " +
                              t.str();
                    st.levels.push_back(std::move(lvl));
                    st.free_parameters = free_params;
                    return st;
                }
                if (auto c = constant_value(t, cfg); c && *c != 0) {
                    st.verdict = SingularVerdict::NoSolution;
                    st.note = "tangency of " + zeta.str() + " reduces to the constant " +
                              rational_str(*c);
                    st.levels.push_back(std::move(lvl));
                    st.free_parameters = free_params;
                    return st;
                }
                if (st.constraints.add(t, "tangency level " + std::to_string(level), cfg))
                    lvl.added.push_back(st.constraints.items().back());
            }
        }
        bool grew = !lvl.added.empty();
        std::vector<Expr> next;
        if (fixed_any) {
            // The field changed; re-run tangency on the whole set.
            for (const auto& c : st.constraints.items()) next.push_back(c.expr);
        } else {
            for (const auto& c : lvl.added) next.push_back(c.expr);
        }
        if (grew || fixed_any) st.levels.push_back(std::move(lvl));
        if (!grew && !fixed_any) break;  // stabilized
        frontier = std::move(next);
        if (level == opts.depth_bound + 1) {
            st.verdict = SingularVerdict::Inconclusive;
            st.note = "tangency depth bound exceeded";
            st.free_parameters = free_params;
            return st;
        }
    }

    // Stabilized: check the generic dimension of the final submanifold.
    std::size_t dim = coords.size();
    if (!st.constraints.empty()) {
        ExprMatrix jac;
        for (const auto& c : st.constraints.items()) {
            std::vector<Expr> row;
            for (const std::string& q : coords) row.push_back(differentiate(c.expr, q));
            jac.push_back(std::move(row));
        }
        Elimination je = eliminate(std::move(jac), coords.size(), cfg);
        st.confidence = combine(st.confidence, je.confidence);
        dim -= je.rank;
    }
    if (dim < m) {
        st.verdict = SingularVerdict::NoSolution;
        st.note = "final constraint submanifold has generic dimension " + std::to_string(dim) +
                  " < m = " + std::to_string(m);
    } else {
        st.verdict = SingularVerdict::FinalSubmanifold;
    }
    st.free_parameters = free_params;
    return st;
}

}  // namespace mvf
