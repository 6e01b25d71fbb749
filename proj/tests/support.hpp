#pragma once

// Shared helpers for the test suites: seeded random expression and
// polynomial generators, the worked two-equation PDE system, and thin
// assertion wrappers.

#include "mvf/multivector.hpp"
#include "mvf/parse.hpp"
#include "mvf/zero.hpp"

#include <random>
#include <string>
#include <vector>

namespace mvftest {

using mvf::Expr;

/// The two commuting-candidate fields of the worked PDE system:
///   Y1 = d/dx1 + (y1-x1-x2) d/dy1 + (-y2+x1+x2) d/dy2
///   Y2 = d/dx2 + (y1^2-x1^2-x2^2-2x1-2x2-2x1x2) d/dy1 + d/dy2
inline mvf::DecomposableMVF pde_example_field() {
    mvf::ChartSpec chart({"x1", "x2"}, {"y1", "y2"});
    auto vars = chart.coordinate_set();
    mvf::VectorField y1(chart), y2(chart);
    y1.set("x1", Expr::num(1));
    y1.set("y1", mvf::parse("y1 - x1 - x2", vars));
    y1.set("y2", mvf::parse("-y2 + x1 + x2", vars));
    y2.set("x2", Expr::num(1));
    y2.set("y1", mvf::parse("y1^2 - x1^2 - x2^2 - 2*x1 - 2*x2 - 2*x1*x2", vars));
    y2.set("y2", Expr::num(1));
    return mvf::DecomposableMVF(chart, {y1, y2});
}

/// Random polynomial expression of bounded degree over the given variables.
inline Expr random_poly(std::mt19937& rng, const std::vector<std::string>& vars,
                        int max_degree, int max_terms = 4) {
    std::uniform_int_distribution<int> nterms(1, max_terms);
    std::uniform_int_distribution<int> coeff(-4, 4);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(vars.size()) - 1);
    std::uniform_int_distribution<int> deg(0, max_degree);
    std::vector<Expr> terms;
    int n = nterms(rng);
    for (int t = 0; t < n; ++t) {
        int c = coeff(rng);
        if (c == 0) c = 1;
        std::vector<Expr> factors{Expr::num(c)};
        int d = deg(rng);
        for (int i = 0; i < d; ++i) factors.push_back(Expr::var(vars[pick(rng)]));
        terms.push_back(Expr::product(std::move(factors)));
    }
    return Expr::sum(std::move(terms));
}

/// Random structural expression exercising the full grammar.
inline Expr random_expr(std::mt19937& rng, const std::vector<std::string>& vars, int depth) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(vars.size()) - 1);
    std::uniform_int_distribution<int> coeff(-6, 6);
    if (depth == 0) {
        std::uniform_int_distribution<int> leaf(0, 2);
        switch (leaf(rng)) {
            case 0: return Expr::num(coeff(rng));
            case 1: return Expr::constant(mvf::Rational(coeff(rng), 1 + (coeff(rng) & 3)));
            default: return Expr::var(vars[pick(rng)]);
        }
    }
    std::uniform_int_distribution<int> node(0, 9);
    switch (node(rng)) {
        case 0:
        case 1:
        case 2:
            return random_expr(rng, vars, depth - 1) + random_expr(rng, vars, depth - 1);
        case 3:
        case 4:
        case 5:
            return random_expr(rng, vars, depth - 1) * random_expr(rng, vars, depth - 1);
        case 6:
            return mvf::pow(Expr::var(vars[pick(rng)]) + Expr::num(1 + (coeff(rng) & 3)), 2);
        case 7: {
            Expr d = Expr::var(vars[pick(rng)]) + Expr::num(5);
            return random_expr(rng, vars, depth - 1) / d;
        }
        case 8:
            return mvf::sin(random_expr(rng, vars, depth - 1));
        default:
            return random_expr(rng, vars, depth - 1) - random_expr(rng, vars, depth - 1);
    }
}

inline bool proven_zero(const Expr& e) {
    return mvf::is_zero(e) == mvf::Verdict::ProvenZero;
}

inline bool proven_equal(const Expr& a, const Expr& b) {
    return proven_zero(a - b);
}

}  // namespace mvftest
