#pragma once

// The integrability algorithm for locally decomposable multivector fields:
// collect the involutivity constraints, branch over their rational
// factorizations, then iterate the tangency condition
// E_{i+1} = { p in E_i : Y_mu(zeta)(p) = 0 } until stabilization.

#include "mvf/factor.hpp"
#include "mvf/multivector.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mvf {

struct Constraint {
    Expr expr;
    std::string provenance;  // "integrability" | "tangency level i" | "compatibility"
};

/// Canonical representative of a constraint: primitive, sign-normalized
/// polynomial when possible; the input otherwise.
inline Expr canonical_constraint(const Expr& e, const SimplifyConfig& cfg = {}) {
    VarTable vars;
    for (const std::string& v : e.variables()) vars.intern(v, false);
    try {
        Frac f = to_rnf(e, vars, cfg.budget());
        if (f.den.is_constant() && !vars.any_atom(f.num) && !f.num.is_zero())
            return poly_to_expr(detail::primitive(f.num), vars);
    } catch (const BudgetExceeded&) {
    }
    return e;
}

class ConstraintSet {
public:
    const std::vector<Constraint>& items() const { return items_; }
    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }

    /// Adds a canonicalized constraint; duplicates (equal normal form) are
    /// dropped. Returns true when the set grew.
    bool add(const Expr& e, const std::string& provenance, const SimplifyConfig& cfg = {}) {
        Expr c = canonical_constraint(e, cfg);
        std::string key = c.str();
        for (const auto& existing : items_)
            if (existing.expr.str() == key) return false;
        items_.push_back({c, provenance});
        return true;
    }

    bool contains_all(const ConstraintSet& other) const {
        for (const auto& c : other.items_) {
            bool found = false;
            for (const auto& mine : items_)
                if (mine.expr.str() == c.expr.str()) {
                    found = true;
                    break;
                }
            if (!found) return false;
        }
        return true;
    }

private:
    std::vector<Constraint> items_;
};

// ---------------------------------------------------------------------------
// Reduction modulo a constraint set.

/// Solves constraints that are linear in some coordinate with a nonzero
/// rational constant coefficient and substitutes; leftovers are kept for
/// numeric membership testing.
class ConstraintReducer {
public:
    ConstraintReducer(const ConstraintSet& set, const std::vector<std::string>& coords,
                      const SimplifyConfig& cfg)
        : cfg_(cfg) {
        std::vector<Expr> pending;
        for (const auto& c : set.items()) pending.push_back(c.expr);
        bool progress = true;
        while (progress) {
            progress = false;
            for (auto it = pending.begin(); it != pending.end(); ++it) {
                Expr cur = substitute_all(*it);
                auto solved = solve_linear(cur, coords);
                if (solved) {
                    bindings_[solved->first] = solved->second;
                    // Keep earlier bindings reduced against the new one.
                    for (auto& [v, rhs] : bindings_)
                        rhs = expand_normal(substitute(rhs, {{solved->first, solved->second}}), cfg_);
                    pending.erase(it);
                    progress = true;
                    break;
                }
            }
        }
        for (const Expr& e : pending) {
            Expr r = substitute_all(e);
            if (is_zero(r, cfg_) != Verdict::ProvenZero) leftovers_.push_back(r);
        }
    }

    const Bindings& bindings() const { return bindings_; }
    const std::vector<Expr>& leftovers() const { return leftovers_; }

    Expr reduce(const Expr& e) const { return substitute_all(e); }

    /// Verdict of e restricted to the constraint zero set, when decidable.
    /// nullopt = undecidable with the available machinery.
    std::optional<Verdict> verdict_on_set(const Expr& e) const {
        Expr r = substitute_all(e);
        if (leftovers_.empty()) return is_zero(r, cfg_);
        auto sampled = sample_on_zero_set(r);
        if (!sampled) return std::nullopt;
        return *sampled ? Verdict::NumericallyZero : Verdict::NumericallyNonzero;
    }

private:
    Expr substitute_all(const Expr& e) const {
        Expr cur = substitute(e, bindings_);
        return expand_normal(cur, cfg_);
    }

    /// Finds a coordinate in which `e` is linear with constant coefficient;
    /// prefers the latest chart coordinate (jet over fiber over base).
    std::optional<std::pair<std::string, Expr>> solve_linear(
        const Expr& e, const std::vector<std::string>& coords) const {
        VarTable vars;
        for (const std::string& v : e.variables()) vars.intern(v, false);
        Frac f;
        try {
            f = to_rnf(e, vars, cfg_.budget());
        } catch (const BudgetExceeded&) {
            return std::nullopt;
        }
        if (!f.den.is_constant() || vars.any_atom(f.num)) return std::nullopt;
        for (auto it = coords.rbegin(); it != coords.rend(); ++it) {
            if (bindings_.count(*it)) continue;
            int id = -1;
            for (int v : f.num.variable_ids())
                if (vars.name(v) == *it) id = v;
            if (id < 0) continue;
            if (f.num.degree_in(id) != 1) continue;
            std::vector<Poly> cs = f.num.coefficients_in(id);
            if (!cs[1].is_constant()) continue;
            Rational c = cs[1].constant_term();
            Expr rest = poly_to_expr(cs[0], vars);
            return std::make_pair(*it, expand_normal(Expr::constant(Rational(-1) / c) * rest, cfg_));
        }
        return std::nullopt;
    }

    /// Samples points on the zero set of the leftover constraints by solving
    /// them one coordinate at a time with bisection; evaluates |e| there.
    std::optional<bool> sample_on_zero_set(const Expr& e) const {
        std::set<std::string> vars = e.variables();
        for (const Expr& c : leftovers_)
            for (const std::string& v : c.variables()) vars.insert(v);
        std::mt19937 rng(cfg_.seed ^ 0x5eed5u);
        int successes = 0;
        for (int attempt = 0; attempt < cfg_.sample_count * 10 && successes < cfg_.sample_count;
             ++attempt) {
            std::map<std::string, double> point;
            for (const std::string& v : vars) point[v] = detail::random_rational_point(rng);
            if (!project_onto_constraints(point, rng)) continue;
            try {
                double val = eval_double(e, point);
                if (!std::isfinite(val)) continue;
                if (std::abs(val) > 1e-7) return false;
                ++successes;
            } catch (const detail::EvalSingular&) {
            }
        }
        if (successes == 0) return std::nullopt;
        return true;
    }

    bool project_onto_constraints(std::map<std::string, double>& point, std::mt19937& rng) const {
        std::set<std::string> used;
        for (const Expr& c : leftovers_) {
            std::string var;
            for (const std::string& v : c.variables())
                if (!used.count(v)) var = v;
            if (var.empty()) return false;
            used.insert(var);
            auto f = [&](double x) -> std::optional<double> {
                point[var] = x;
                try {
                    double r = eval_double(c, point);
                    return std::isfinite(r) ? std::optional<double>(r) : std::nullopt;
                } catch (const detail::EvalSingular&) {
                    return std::nullopt;
                }
            };
            // Scan for a sign change, then bisect.
            bool found = false;
            std::uniform_real_distribution<double> shift(-2.0, 2.0);
            double offset = shift(rng);
            double prev_x = -12 + offset;
            auto prev = f(prev_x);
            for (int i = 1; i <= 96 && !found; ++i) {
                double x = -12 + offset + i * 0.25;
                auto cur = f(x);
                if (prev && cur) {
                    if (*prev == 0) {
                        point[var] = prev_x;
                        found = true;
                        break;
                    }
                    if ((*prev < 0) != (*cur < 0)) {
                        double lo = prev_x, hi = x;
                        for (int it = 0; it < 80; ++it) {
                            double mid = (lo + hi) / 2;
                            auto fm = f(mid);
                            if (!fm) break;
                            if ((*prev < 0) != (*fm < 0))
                                hi = mid;
                            else
                                lo = mid;
                        }
                        point[var] = (lo + hi) / 2;
                        found = true;
                    }
                }
                prev = cur;
                prev_x = x;
            }
            if (!found) return false;
        }
        return true;
    }

    SimplifyConfig cfg_;
    Bindings bindings_;
    std::vector<Expr> leftovers_;
};

// ---------------------------------------------------------------------------
// Branch tree.

enum class BranchVerdict { IntegrableEverywhere, IntegrableOnSubmanifold, NoSolution, Inconclusive };

inline const char* branch_verdict_name(BranchVerdict v) {
    switch (v) {
        case BranchVerdict::IntegrableEverywhere: return "integrable-everywhere";
        case BranchVerdict::IntegrableOnSubmanifold: return "integrable-on-submanifold";
        case BranchVerdict::NoSolution: return "no-solution";
        case BranchVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct BranchNode {
    ConstraintSet constraints;
    BranchVerdict verdict = BranchVerdict::Inconclusive;
    bool dynamical = false;
    std::string note;
    std::vector<BranchNode> children;

    bool leaf() const { return children.empty(); }

    void visit_leaves(const std::function<void(const BranchNode&)>& f) const {
        if (leaf()) {
            f(*this);
            return;
        }
        for (const auto& c : children) c.visit_leaves(f);
    }
};

struct BranchTree {
    BranchNode root;
    Confidence confidence = Confidence::Proven;
    std::vector<std::string> assumptions;

    /// Chart-level summary computed from the leaf verdicts.
    BranchVerdict overall() const {
        bool inconclusive = false, submanifold = false, everywhere = false;
        root.visit_leaves([&](const BranchNode& n) {
            switch (n.verdict) {
                case BranchVerdict::IntegrableEverywhere: everywhere = true; break;
                case BranchVerdict::IntegrableOnSubmanifold: submanifold = true; break;
                case BranchVerdict::Inconclusive: inconclusive = true; break;
                case BranchVerdict::NoSolution: break;
            }
        });
        if (everywhere && root.leaf()) return BranchVerdict::IntegrableEverywhere;
        if (inconclusive) return BranchVerdict::Inconclusive;
        if (submanifold || everywhere) return BranchVerdict::IntegrableOnSubmanifold;
        return BranchVerdict::NoSolution;
    }
};

struct IntegrabilityOptions {
    int depth_bound = 10;
};

namespace detail {

struct AlgoContext {
    const DecomposableMVF& y;
    SimplifyConfig cfg;
    IntegrabilityOptions opts;
    Confidence confidence = Confidence::Proven;
    std::vector<std::string> coords;
};

inline void note_verdict(AlgoContext& ctx, Verdict v) {
    ctx.confidence = combine(ctx.confidence, confidence_of(v));
}

/// Estimated generic dimension of the constraint zero set: chart dimension
/// minus the rank of the constraint Jacobian.
inline std::size_t generic_dimension(AlgoContext& ctx, const ConstraintSet& set) {
    if (set.empty()) return ctx.coords.size();
    ExprMatrix jac;
    for (const auto& c : set.items()) {
        std::vector<Expr> row;
        for (const std::string& q : ctx.coords) row.push_back(differentiate(c.expr, q));
        jac.push_back(std::move(row));
    }
    Elimination e = eliminate(std::move(jac), ctx.coords.size(), ctx.cfg);
    ctx.confidence = combine(ctx.confidence, e.confidence);
    return ctx.coords.size() - e.rank;
}

// Tangency iteration on one branch; appends children or fixes the verdict.
inline void run_tangency(AlgoContext& ctx, BranchNode& node, std::vector<Expr> frontier,
                         int level) {
    if (level > ctx.opts.depth_bound) {
        node.verdict = BranchVerdict::Inconclusive;
        node.note = "tangency depth bound exceeded";
        return;
    }
    ConstraintReducer reducer(node.constraints, ctx.coords, ctx.cfg);
    std::vector<Expr> fresh;
    for (const Expr& zeta : frontier) {
        for (std::size_t mu = 0; mu < ctx.y.m(); ++mu) {
            Expr t = ctx.y.factors[mu].apply(zeta);
            auto verdict = reducer.verdict_on_set(t);
            if (!verdict) {
                node.verdict = BranchVerdict::Inconclusive;
                node.note = "undecidable reduction of " + reducer.reduce(t).str();
                return;
            }
            note_verdict(ctx, *verdict);
            if (verdict_zero(*verdict)) continue;
            Expr reduced = reducer.reduce(t);
            if (auto c = constant_value(reduced, ctx.cfg); c && *c != 0) {
                node.verdict = BranchVerdict::NoSolution;
                node.note = "tangency of " + zeta.str() + " reduces to the constant " +
                            rational_str(*c);
                return;
            }
            // New constraint; branch over its factors. Children reprocess the
            // whole current frontier against their refined constraint set.
            std::vector<Expr> factors = factor_constraint(reduced, ctx.cfg);
            if (factors.size() > 1) {
                for (const Expr& f : factors) {
                    BranchNode child;
                    child.constraints = node.constraints;
                    for (const Expr& g : fresh)
                        child.constraints.add(g, "tangency level " + std::to_string(level),
                                              ctx.cfg);
                    if (!child.constraints.add(f, "tangency level " + std::to_string(level),
                                               ctx.cfg))
                        continue;
                    std::vector<Expr> child_frontier = frontier;
                    child_frontier.insert(child_frontier.end(), fresh.begin(), fresh.end());
                    child_frontier.push_back(f);
                    run_tangency(ctx, child, std::move(child_frontier), level + 1);
                    node.children.push_back(std::move(child));
                }
                if (!node.children.empty()) return;
                continue;
            }
            Expr f = factors.empty() ? reduced : factors[0];
            if (node.constraints.add(f, "tangency level " + std::to_string(level), ctx.cfg))
                fresh.push_back(f);
        }
    }
    if (!fresh.empty()) {
        run_tangency(ctx, node, std::move(fresh), level + 1);
        return;
    }
    // Stabilized. Check the dimension of the final submanifold.
    std::size_t dim = generic_dimension(ctx, node.constraints);
    if (dim < ctx.y.m()) {
        node.verdict = BranchVerdict::NoSolution;
        node.note = "final constraint set has generic dimension " + std::to_string(dim) +
                    " < m = " + std::to_string(ctx.y.m());
        return;
    }
    node.verdict = node.constraints.empty() ? BranchVerdict::IntegrableEverywhere
                                            : BranchVerdict::IntegrableOnSubmanifold;
    // In the normalized frame every xi coefficient vanishes identically, so a
    // stabilized branch carries a dynamical representative.
    node.dynamical = true;
}

}  // namespace detail

/// Full integrability algorithm; returns the branch tree of constraint sets
/// and verdicts.
inline BranchTree integrability_algorithm(const DecomposableMVF& y,
                                          const SimplifyConfig& cfg = {},
                                          const IntegrabilityOptions& opts = {}) {
    require_normalized(y, cfg);
    detail::AlgoContext ctx{y, cfg, opts, Confidence::Proven, y.chart.coordinates()};

    BranchTree tree;
    tree.assumptions.push_back(
        "constraint loci are assumed to be closed submanifolds (regularity unverified)");

    InvolutivityDefect defect = involutivity_defect(y, cfg);
    std::vector<Expr> zeta_constraints;
    ConstraintSet e1;
    for (std::size_t mu = 0; mu < y.m(); ++mu)
        for (std::size_t nu = mu + 1; nu < y.m(); ++nu)
            for (std::size_t l = 0; l < defect.fiber_count(); ++l) {
                const Expr& z = defect.zeta(mu, nu, l);
                Verdict v = is_zero(z, cfg);
                detail::note_verdict(ctx, v);
                if (verdict_zero(v)) continue;
                if (e1.add(z, "integrability", cfg))
                    zeta_constraints.push_back(e1.items().back().expr);
            }

    if (zeta_constraints.empty()) {
        tree.root.verdict = BranchVerdict::IntegrableEverywhere;
        tree.root.dynamical = true;
        tree.confidence = ctx.confidence;
        return tree;
    }

    // E1 is empty as soon as one constraint is a nonzero constant.
    for (const Expr& z : zeta_constraints) {
        if (auto c = constant_value(z, cfg); c && *c != 0) {
            tree.root.verdict = BranchVerdict::NoSolution;
            tree.root.note =
                "integrability constraint is the nonzero constant " + rational_str(*c);
            tree.confidence = ctx.confidence;
            return tree;
        }
    }

    // Branch over the cartesian product of the constraint factorizations.
    std::vector<std::vector<Expr>> factored;
    for (const Expr& z : zeta_constraints) factored.push_back(factor_constraint(z, cfg));
    std::vector<ConstraintSet> branches{ConstraintSet{}};
    for (const auto& choices : factored) {
        std::vector<ConstraintSet> next;
        for (const auto& partial : branches)
            for (const Expr& f : choices) {
                ConstraintSet s = partial;
                s.add(f, "integrability", cfg);
                next.push_back(std::move(s));
            }
        branches = std::move(next);
    }

    for (auto& s : branches) {
        BranchNode child;
        child.constraints = s;
        std::vector<Expr> frontier;
        for (const auto& c : s.items()) frontier.push_back(c.expr);
        detail::run_tangency(ctx, child, std::move(frontier), 1);
        tree.root.children.push_back(std::move(child));
    }
    tree.root.verdict = tree.overall();
    tree.confidence = ctx.confidence;
    return tree;
}

}  // namespace mvf
