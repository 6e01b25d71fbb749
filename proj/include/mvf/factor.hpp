#pragma once

// Best-effort factorization of polynomial constraints over the rationals.
// Handles monomial content, exact cofactor division, quadratics via a
// polynomial discriminant square root, and rational roots of univariate
// polynomials. Anything it cannot split is returned whole; non-polynomial
// input passes through unchanged.

#include "mvf/zero.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace mvf {

namespace detail {

inline Poly sign_normalized(const Poly& p) {
    if (p.is_zero()) return p;
    return p.leading().second < 0 ? -p : p;
}

inline Poly primitive(const Poly& p) {
    if (p.is_zero()) return p;
    Rational c = p.content();
    Poly q = p.scaled(Rational(1) / c);
    return sign_normalized(q);
}

inline void factor_poly(const Poly& p, const PolyBudget& budget, std::vector<Poly>& out);

// Tries to split off an exact divisor; on success recurses on both parts.
inline bool try_split(const Poly& p, const Poly& divisor, const PolyBudget& budget,
                      std::vector<Poly>& out) {
    if (divisor.is_constant()) return false;
    auto q = p.divide_exact(divisor, budget);
    if (!q) return false;
    factor_poly(primitive(divisor), budget, out);
    factor_poly(primitive(*q), budget, out);
    return true;
}

// Quadratic in `var`: a*v^2 + b*v + c splits iff b^2 - 4ac is a perfect
// square polynomial.
inline bool try_quadratic(const Poly& p, int var, const PolyBudget& budget,
                          std::vector<Poly>& out) {
    std::vector<Poly> cs = p.coefficients_in(var);
    if (cs.size() != 3) return false;
    const Poly &c = cs[0], &b = cs[1], &a = cs[2];
    Poly disc = b.mul(b, budget) - a.mul(c, budget).scaled(4);
    auto s = poly_sqrt(disc, budget);
    if (!s) return false;
    Poly v = Poly::variable(var);
    Poly f1 = a.mul(v, budget).scaled(2) + (b - *s);
    Poly f2 = a.mul(v, budget).scaled(2) + (b + *s);
    if (f1.is_zero() || f2.is_zero()) return false;
    // p * 4a = f1 * f2; for constant leading coefficient the primitives of
    // f1, f2 multiply back to p up to a rational constant.
    if (a.is_constant()) {
        factor_poly(primitive(f1), budget, out);
        factor_poly(primitive(f2), budget, out);
        return true;
    }
    return try_split(p, primitive(f1), budget, out);
}

inline std::vector<BigInt> small_divisors(const BigInt& n) {
    std::vector<BigInt> out;
    BigInt a = abs(n);
    if (a == 0 || a > BigInt(1000000000000LL)) return out;
    for (BigInt d = 1; d * d <= a && d < 100000; ++d) {
        if (a % d == 0) {
            out.push_back(d);
            out.push_back(a / d);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Rational-root extraction for a univariate polynomial over Z.
inline bool try_rational_roots(const Poly& p, int var, const PolyBudget& budget,
                               std::vector<Poly>& out) {
    std::vector<Poly> cs = p.coefficients_in(var);
    for (const Poly& c : cs)
        if (!c.is_constant()) return false;
    // Clear denominators.
    BigInt l = 1;
    for (const Poly& c : cs) l = lcm(l, denominator(c.constant_term()));
    std::vector<BigInt> a;
    for (const Poly& c : cs) a.push_back(numerator(c.constant_term() * Rational(l)));
    while (!a.empty() && a.back() == 0) a.pop_back();
    if (a.size() < 2) return false;
    std::size_t k = 0;
    while (a[k] == 0) ++k;  // var^k divides; already removed as monomial content upstream
    auto eval_at = [&](const Rational& x) {
        Rational acc = 0;
        for (std::size_t i = a.size(); i-- > 0;) acc = acc * x + Rational(a[i]);
        return acc;
    };
    for (const BigInt& pnum : small_divisors(a[k])) {
        for (const BigInt& qden : small_divisors(a.back())) {
            for (int sign : {1, -1}) {
                Rational root(sign * pnum, qden);
                if (eval_at(root) != 0) continue;
                Poly lin = Poly::variable(var).scaled(Rational(denominator(root))) -
                           Poly(Rational(numerator(root)));
                return try_split(p, lin, budget, out);
            }
        }
    }
    return false;
}

inline void factor_poly(const Poly& p, const PolyBudget& budget, std::vector<Poly>& out) {
    if (p.is_constant()) return;
    // Monomial content: common variable powers split off as linear factors.
    Monomial mc = p.monomial_content();
    if (!mc.empty()) {
        for (auto& [v, e] : mc.factors)
            for (int i = 0; i < e; ++i) out.push_back(Poly::variable(v));
        factor_poly(primitive(*p.divide_monomial(mc)), budget, out);
        return;
    }
    std::set<int> ids = p.variable_ids();
    // Linear in some variable: try the coefficient as a cofactor.
    for (int v : ids) {
        if (p.degree_in(v) != 1) continue;
        std::vector<Poly> cs = p.coefficients_in(v);
        if (cs[1].is_constant()) {
            out.push_back(primitive(p));  // primitive and linear: irreducible
            return;
        }
        if (try_split(p, primitive(cs[1]), budget, out)) return;
    }
    for (int v : ids)
        if (p.degree_in(v) == 2 && try_quadratic(p, v, budget, out)) return;
    if (ids.size() == 1) {
        int v = *ids.begin();
        if (p.degree_in(v) >= 3 && try_rational_roots(p, v, budget, out)) return;
    }
    out.push_back(primitive(p));
}

}  // namespace detail

/// Irreducible (best-effort) factors of a polynomial constraint, content
/// dropped, each factor sign-normalized, sorted by printed form.
/// Non-polynomial input is returned unchanged as a single factor.
inline std::vector<Expr> factor_constraint(const Expr& e, const SimplifyConfig& cfg = {}) {
    VarTable vars;
    for (const std::string& v : e.variables()) vars.intern(v, false);
    Frac f;
    try {
        f = to_rnf(e, vars, cfg.budget());
    } catch (const BudgetExceeded&) {
        return {e};
    }
    if (!f.den.is_constant() || vars.any_atom(f.num)) return {e};
    if (f.num.is_constant()) return {e};
    std::vector<Poly> polys;
    detail::factor_poly(detail::primitive(f.num), cfg.budget(), polys);
    std::vector<Expr> out;
    out.reserve(polys.size());
    for (const Poly& p : polys) out.push_back(poly_to_expr(p, vars));
    std::sort(out.begin(), out.end(),
              [](const Expr& a, const Expr& b) { return a.str() < b.str(); });
    return out;
}

}  // namespace mvf
