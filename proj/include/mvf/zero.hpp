#pragma once

// Zero-testing. Inside the rational-function fragment the verdict is decided
// exactly by the rational normal form. Anything else (transcendental atoms,
// blown expansion budgets) is sampled at random rational points and reported
// with the weaker Numerically* labels; those never upgrade to Proven*.

#include "mvf/calculus.hpp"
#include "mvf/poly.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>

namespace mvf {

enum class Verdict { ProvenZero, ProvenNonzero, NumericallyZero, NumericallyNonzero };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::ProvenZero: return "proven-zero";
        case Verdict::ProvenNonzero: return "proven-nonzero";
        case Verdict::NumericallyZero: return "numerically-zero";
        case Verdict::NumericallyNonzero: return "numerically-nonzero";
    }
    return "?";
}

inline bool verdict_zero(Verdict v) {
    return v == Verdict::ProvenZero || v == Verdict::NumericallyZero;
}
inline bool verdict_proven(Verdict v) {
    return v == Verdict::ProvenZero || v == Verdict::ProvenNonzero;
}

/// Weakest-link confidence label propagated into reports.
enum class Confidence { Proven, Numeric };

inline Confidence combine(Confidence a, Confidence b) {
    return (a == Confidence::Numeric || b == Confidence::Numeric) ? Confidence::Numeric
                                                                  : Confidence::Proven;
}
inline Confidence confidence_of(Verdict v) {
    return verdict_proven(v) ? Confidence::Proven : Confidence::Numeric;
}

struct SimplifyConfig {
    long max_expansion_degree = 64;
    int sample_count = 20;
    double tolerance = 1e-10;
    unsigned seed = 20240811;

    void validate() const {
        if (sample_count < 1) throw Error("sample_count must be >= 1");
        if (!(tolerance > 0)) throw Error("tolerance must be > 0");
    }
    PolyBudget budget() const { return {max_expansion_degree, 200000}; }
};

// ---------------------------------------------------------------------------
// Floating-point evaluation.

namespace detail {
struct EvalSingular {};  // internal: signals a bad sample point
}

inline double eval_double(const Expr& e, const std::map<std::string, double>& values) {
    switch (e.kind()) {
        case NodeKind::Constant:
            return static_cast<double>(e.value());
        case NodeKind::Variable: {
            auto it = values.find(e.name());
            if (it == values.end()) throw Error("unbound variable '" + e.name() + "' in evaluation");
            return it->second;
        }
        case NodeKind::Sum: {
            double s = 0;
            for (const Expr& k : e.kids()) s += eval_double(k, values);
            return s;
        }
        case NodeKind::Product: {
            double p = 1;
            for (const Expr& k : e.kids()) p *= eval_double(k, values);
            return p;
        }
        case NodeKind::Quotient: {
            double d = eval_double(e.kids()[1], values);
            if (d == 0) throw detail::EvalSingular{};
            return eval_double(e.kids()[0], values) / d;
        }
        case NodeKind::Power: {
            double b = eval_double(e.kids()[0], values);
            const Rational& r = e.value();
            if (auto n = to_long(r)) {
                if (b == 0 && *n < 0) throw detail::EvalSingular{};
                return std::pow(b, static_cast<double>(*n));
            }
            if (b < 0) throw detail::EvalSingular{};
            if (b == 0 && r < 0) throw detail::EvalSingular{};
            return std::pow(b, static_cast<double>(r));
        }
        case NodeKind::Func: {
            double a = eval_double(e.kids()[0], values);
            switch (e.func()) {
                case FuncKind::Sin: return std::sin(a);
                case FuncKind::Cos: return std::cos(a);
                case FuncKind::Exp: return std::exp(a);
                case FuncKind::Log:
                    if (a <= 0) throw detail::EvalSingular{};
                    return std::log(a);
                case FuncKind::Sqrt:
                    if (a < 0) throw detail::EvalSingular{};
                    return std::sqrt(a);
            }
        }
    }
    return 0;
}

namespace detail {

inline double random_rational_point(std::mt19937& rng) {
    std::uniform_int_distribution<int> num(-40, 40);
    std::uniform_int_distribution<int> den(1, 8);
    return static_cast<double>(num(rng)) / static_cast<double>(den(rng));
}

}  // namespace detail

/// Samples `e` at random rational points; true result means all samples were
/// below tolerance. Resamples on singular points; throws EvalError once the
/// retry budget is exhausted.
inline bool samples_vanish(const Expr& e, const SimplifyConfig& cfg) {
    cfg.validate();
    std::set<std::string> vars = e.variables();
    std::mt19937 rng(cfg.seed);
    int retries = cfg.sample_count * 10 + 20;
    for (int i = 0; i < cfg.sample_count; ++i) {
        while (true) {
            std::map<std::string, double> point;
            for (const std::string& v : vars) point[v] = detail::random_rational_point(rng);
            try {
                double val = eval_double(e, point);
                if (!std::isfinite(val)) throw detail::EvalSingular{};
                if (std::abs(val) > cfg.tolerance) return false;
                break;
            } catch (const detail::EvalSingular&) {
                if (--retries <= 0)
                    throw EvalError("persistent evaluation singularity while sampling: " + e.str());
            }
        }
    }
    return true;
}

/// The decision procedure behind every "= 0" test.
inline Verdict is_zero(const Expr& e, const SimplifyConfig& cfg = {}) {
    cfg.validate();
    bool have_rnf = false;
    bool atoms = false;
    VarTable vars;
    try {
        Frac f = to_rnf(e, vars, cfg.budget());
        have_rnf = true;
        if (f.num.is_zero()) return Verdict::ProvenZero;
        atoms = vars.any_atom(f.num);
        if (!atoms) return Verdict::ProvenNonzero;
    } catch (const BudgetExceeded&) {
        // fall through to sampling
    }
    (void)have_rnf;
    return samples_vanish(e, cfg) ? Verdict::NumericallyZero : Verdict::NumericallyNonzero;
}

/// Verdict on a - b.
inline Verdict equal_verdict(const Expr& a, const Expr& b, const SimplifyConfig& cfg = {}) {
    return is_zero(a - b, cfg);
}

inline bool definitely_equal(const Expr& a, const Expr& b, const SimplifyConfig& cfg = {}) {
    return is_zero(a - b, cfg) == Verdict::ProvenZero;
}

/// Exact rational value when the normal form is variable-free, including
/// quotients of proportional polynomials.
inline std::optional<Rational> constant_value(const Expr& e,
                                              const SimplifyConfig& cfg = {}) {
    VarTable vars;
    try {
        Frac f = to_rnf(e, vars, cfg.budget());
        if (f.num.is_zero()) return Rational(0);
        if (f.num.is_constant() && f.den.is_constant())
            return f.num.constant_term() / f.den.constant_term();
        Rational c = f.num.leading().second / f.den.leading().second;
        if ((f.num - f.den.scaled(c)).is_zero()) return c;
    } catch (const BudgetExceeded&) {
    }
    return std::nullopt;
}

/// Expanded canonical form (collected polynomial quotient) when it fits the
/// budget; otherwise the input unchanged. Display stays compact elsewhere.
inline Expr expand_normal(const Expr& e, const SimplifyConfig& cfg = {}) {
    VarTable vars;
    try {
        Frac f = to_rnf(e, vars, cfg.budget());
        if (vars.any_atom(f.num) || vars.any_atom(f.den)) return e;
        Expr num = poly_to_expr(f.num, vars);
        if (f.den.is_constant()) {
            Rational c = f.den.constant_term();
            return c == 1 ? num : Expr::product({Expr::constant(Rational(1) / c), num});
        }
        return Expr::quotient(num, poly_to_expr(f.den, vars));
    } catch (const BudgetExceeded&) {
        return e;
    } catch (const EvalError&) {
        return e;
    }
}

}  // namespace mvf
