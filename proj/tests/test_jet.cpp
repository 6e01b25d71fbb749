#include <catch2/catch_amalgamated.hpp>

#include "mvf/jet.hpp"
#include "mvf/parse.hpp"
#include "support.hpp"

#include <random>

using namespace mvf;
using mvftest::proven_zero;

namespace {

JetFieldJ1 random_jetfield(std::mt19937& rng, const ChartSpec& chart, int degree) {
    auto coords = chart.coordinates();
    std::vector<std::string> names(coords.begin(), coords.end());
    std::size_t m = chart.m(), N = chart.fiber_dim();
    std::vector<Expr> f, g;
    for (std::size_t i = 0; i < N * m; ++i) f.push_back(mvftest::random_poly(rng, names, degree, 2));
    for (std::size_t i = 0; i < N * m * m; ++i)
        g.push_back(mvftest::random_poly(rng, names, degree, 2));
    return JetFieldJ1(chart, std::move(f), std::move(g));
}

}  // namespace

TEST_CASE("curvature of a connection on E") {
    ChartSpec chart({"x1", "x2"}, {"y"});
    auto vars = chart.coordinate_set();

    SECTION("flat connection") {
        ConnectionE c(chart, {Expr::num(0), Expr::num(0)});
        REQUIRE(curvature_E(c).flat());
    }
    SECTION("gradient of a base function is flat") {
        Expr h = parse("x1^2*x2", vars);
        ConnectionE c(chart, {differentiate(h, "x1"), differentiate(h, "x2")});
        REQUIRE(curvature_E(c).flat());
    }
    SECTION("Gamma depending only on the fiber is still flat here") {
        ConnectionE c(chart, {parse("y", vars), Expr::num(0)});
        REQUIRE(curvature_E(c).flat());
    }
    SECTION("x2*y twist has curvature -y") {
        ConnectionE c(chart, {parse("x2*y", vars), Expr::num(0)});
        CurvatureE r = curvature_E(c);
        REQUIRE(proven_zero(r.at(0, 0, 1) + parse("y", vars)));
        REQUIRE(proven_zero(r.at(0, 0, 1) + r.at(0, 1, 0)));  // antisymmetry
    }
    SECTION("cross-check against the bracket of horizontal fields") {
        std::mt19937 rng(3111);
        for (int i = 0; i < 10; ++i) {
            std::vector<std::string> names{"x1", "x2", "y"};
            ConnectionE c(chart, {mvftest::random_poly(rng, names, 2),
                                  mvftest::random_poly(rng, names, 2)});
            VectorField h1(chart), h2(chart);
            h1.set("x1", Expr::num(1));
            h1.set("y", c.at(0, 0));
            h2.set("x2", Expr::num(1));
            h2.set("y", c.at(0, 1));
            Expr bracket_y = lie_bracket(h1, h2).component("y");
            REQUIRE(proven_zero(curvature_E(c).at(0, 0, 1) - bracket_y));
        }
    }
}

TEST_CASE("curvature of a jet field") {
    ChartSpec chart = ChartSpec::jet_chart({"x1", "x2"}, {"y1"});

    SECTION("trivial SOPDE is flat") {
        REQUIRE(curvature_J1(JetFieldJ1::trivial_sopde(chart)).flat());
    }
    SECTION("dim-2 quadratic family with constant trace-free G is flat") {
        JetFieldJ1 j = JetFieldJ1::trivial_sopde(chart);
        std::vector<Expr> g(4, Expr::num(0));
        g[0 * 2 + 0] = Expr::num(3);    // G^1_{00}
        g[1 * 2 + 1] = Expr::num(-3);   // G^1_{11} = -G^1_{00}
        JetFieldJ1 jj(chart, j.F, std::move(g));
        REQUIRE(curvature_J1(jj).flat());
    }
    SECTION("curvature antisymmetry in the direction pair") {
        std::mt19937 rng(90210);
        JetFieldJ1 j = random_jetfield(rng, chart, 2);
        CurvatureJ1 r = curvature_J1(j);
        for (std::size_t b = 0; b < 1; ++b)
            for (std::size_t mu = 0; mu < 2; ++mu)
                for (std::size_t eta = 0; eta < 2; ++eta) {
                    REQUIRE(proven_zero(r.y_at(b, mu, eta) + r.y_at(b, eta, mu)));
                    for (std::size_t rho = 0; rho < 2; ++rho)
                        REQUIRE(proven_zero(r.v_at(b, rho, mu, eta) + r.v_at(b, rho, eta, mu)));
                }
    }
    SECTION("equivalence with the involutivity defect of the associated field") {
        std::mt19937 rng(160493);
        ChartSpec chart2 = ChartSpec::jet_chart({"x1", "x2"}, {"y1", "y2"});
        int flat_seen = 0, curved_seen = 0;
        for (int i = 0; i < 20; ++i) {
            JetFieldJ1 j = i % 4 == 0 ? JetFieldJ1::trivial_sopde(chart2)
                                      : random_jetfield(rng, chart2, 2);
            bool flat = curvature_J1(j).flat();
            InvolutivityDefect d = involutivity_defect(jetfield_to_mvf(j));
            REQUIRE(flat == d.involutive());
            (flat ? flat_seen : curved_seen)++;
        }
        REQUIRE(flat_seen > 0);
        REQUIRE(curved_seen > 0);
    }
}

TEST_CASE("jet field / multivector dictionary") {
    ChartSpec chart = ChartSpec::jet_chart({"x1", "x2"}, {"y1"});
    auto vars = chart.coordinate_set();

    SECTION("trivial SOPDE factors") {
        DecomposableMVF x = jetfield_to_mvf(JetFieldJ1::trivial_sopde(chart));
        REQUIRE(is_normalized_transverse(x));
        REQUIRE(x.factors[0].component("y1") == Expr::var("v1_1"));
        REQUIRE(x.factors[1].component("y1") == Expr::var("v1_2"));
    }
    SECTION("round trip is the identity on (F, G)") {
        std::mt19937 rng(1789);
        for (int i = 0; i < 10; ++i) {
            JetFieldJ1 j = random_jetfield(rng, chart, 2);
            JetFieldJ1 back = mvf_to_jetfield(jetfield_to_mvf(j));
            for (std::size_t k = 0; k < j.F.size(); ++k)
                REQUIRE(proven_zero(back.F[k] - j.F[k]));
            for (std::size_t k = 0; k < j.G.size(); ++k)
                REQUIRE(proven_zero(back.G[k] - j.G[k]));
        }
    }
    SECTION("scaling by non-vanishing factors does not change (F, G)") {
        std::mt19937 rng(41);
        JetFieldJ1 j = random_jetfield(rng, chart, 1);
        DecomposableMVF x = jetfield_to_mvf(j);
        std::vector<VectorField> scaled{
            x.factors[0].scaled(parse("1 + x1^2", vars)),
            x.factors[1].scaled(parse("2 + x2^2", vars))};
        JetFieldJ1 back = mvf_to_jetfield(DecomposableMVF(chart, scaled));
        for (std::size_t k = 0; k < j.F.size(); ++k) REQUIRE(proven_zero(back.F[k] - j.F[k]));
        for (std::size_t k = 0; k < j.G.size(); ++k) REQUIRE(proven_zero(back.G[k] - j.G[k]));
    }
    SECTION("vertical factor is rejected") {
        std::vector<VectorField> fs{VectorField(chart), VectorField(chart)};
        fs[0].set("y1", Expr::num(1));
        fs[1].set("x2", Expr::num(1));
        REQUIRE_THROWS_AS(mvf_to_jetfield(DecomposableMVF(chart, fs)), ChartError);
    }
}

TEST_CASE("contact forms") {
    SECTION("single generator for m = N = 1") {
        ChartSpec chart = ChartSpec::jet_chart({"x"}, {"y"});
        auto th = contact_forms(chart);
        REQUIRE(th.size() == 1);
        REQUIRE(th[0].coefficient(CobasisMask(1) << 1) == Expr::num(1));   // dy
        REQUIRE(th[0].coefficient(CobasisMask(1) << 0) == -Expr::var("v1_1"));
    }
    SECTION("m = 2, N = 2 generators have three terms each") {
        ChartSpec chart = ChartSpec::jet_chart({"x1", "x2"}, {"y1", "y2"});
        auto th = contact_forms(chart);
        REQUIRE(th.size() == 2);
        for (const auto& t : th) REQUIRE(t.terms().size() == 3);
    }
}

TEST_CASE("sopde_check") {
    ChartSpec chart = ChartSpec::jet_chart({"x1", "x2"}, {"y1"});
    auto vars = chart.coordinate_set();

    SECTION("trivial SOPDE passes both routes") {
        auto rep = sopde_check(jetfield_to_mvf(JetFieldJ1::trivial_sopde(chart)));
        REQUIRE(rep.via_F);
        REQUIRE(rep.via_theta);
    }
    SECTION("F off by one fails both routes with witness 1") {
        JetFieldJ1 j = JetFieldJ1::trivial_sopde(chart);
        std::vector<Expr> f = j.F;
        f[0] = f[0] + Expr::num(1);
        auto rep = sopde_check(jetfield_to_mvf(JetFieldJ1(chart, f, j.G)));
        REQUIRE_FALSE(rep.via_F);
        REQUIRE_FALSE(rep.via_theta);
        REQUIRE(rep.witnesses.size() == 1);
        REQUIRE(rep.witnesses[0] == Expr::num(1));
    }
    SECTION("scaled SOPDE passes after normalization") {
        JetFieldJ1 j = JetFieldJ1::trivial_sopde(chart);
        DecomposableMVF x = jetfield_to_mvf(j);
        std::vector<VectorField> scaled{
            x.factors[0].scaled(parse("1 + x1^2", vars)),
            x.factors[1].scaled(parse("1 + x2^2 + y1^2", vars))};
        auto rep = sopde_check(DecomposableMVF(chart, scaled));
        REQUIRE(rep.via_F);
        REQUIRE(rep.via_theta);
    }
}

TEST_CASE("sopde two-way agreement on randomized instances") {
    std::mt19937 rng(5883);
    ChartSpec chart = ChartSpec::jet_chart({"x1", "x2"}, {"y1"});
    auto vars = chart.coordinate_set();
    int disagreements = 0, sopde_count = 0;
    for (int i = 0; i < 40; ++i) {
        JetFieldJ1 j = random_jetfield(rng, chart, 1);
        bool make_sopde = i % 2 == 0;
        if (make_sopde) j = JetFieldJ1(chart, JetFieldJ1::trivial_sopde(chart).F, j.G);
        DecomposableMVF x = jetfield_to_mvf(j);
        if (i % 3 == 0) {
            // Non-normalized representative of the same class.
            std::vector<VectorField> mixed{
                x.factors[0].scaled(parse("1 + y1^2", vars)) + x.factors[1],
                x.factors[1].scaled(Expr::num(2))};
            x = DecomposableMVF(chart, mixed);
        }
        auto rep = sopde_check(x);
        if (rep.via_F != rep.via_theta) ++disagreements;
        if (rep.via_F != make_sopde) ++disagreements;
        if (rep.via_F) ++sopde_count;
    }
    REQUIRE(disagreements == 0);
    REQUIRE(sopde_count == 20);
}

TEST_CASE("sections, prolongation, holonomy") {
    ChartSpec chart = ChartSpec::jet_chart({"x1", "x2"}, {"y1"});
    auto base_vars = std::set<std::string>{"x1", "x2"};

    SECTION("prolongation of the worked solution") {
        Section phi(chart, {parse("x1 + x2 + 1", base_vars)});
        JetSection psi = prolong_section(phi);
        REQUIRE(psi.g_at(0, 0) == Expr::num(1));
        REQUIRE(psi.g_at(0, 1) == Expr::num(1));
        REQUIRE(holonomy_check(psi));
    }
    SECTION("constant and product sections") {
        Section c(chart, {Expr::num(5)});
        JetSection pc = prolong_section(c);
        REQUIRE(pc.g_at(0, 0) == Expr::num(0));
        Section prod(chart, {parse("x1*x2", base_vars)});
        JetSection pp = prolong_section(prod);
        REQUIRE(pp.g_at(0, 0) == Expr::var("x2"));
        REQUIRE(pp.g_at(0, 1) == Expr::var("x1"));
        REQUIRE(holonomy_check(pp));
    }
    SECTION("non-holonomic section") {
        JetSection bad(chart, {Expr::var("x1")}, {Expr::num(0), Expr::num(0)});
        REQUIRE_FALSE(holonomy_check(bad));
    }
    SECTION("holonomy of prolongations holds for random sections") {
        std::mt19937 rng(8080);
        for (int i = 0; i < 20; ++i) {
            Section phi(chart, {mvftest::random_poly(rng, {"x1", "x2"}, 3)});
            REQUIRE(holonomy_check(prolong_section(phi)));
        }
    }
}

TEST_CASE("integral section residuals") {
    ChartSpec chart = ChartSpec::jet_chart({"x1", "x2"}, {"y1"});
    auto base_vars = std::set<std::string>{"x1", "x2"};

    SECTION("affine section solves the trivial SOPDE") {
        JetFieldJ1 j = JetFieldJ1::trivial_sopde(chart);
        Section phi(chart, {parse("2*x1 + 3*x2 + 1", base_vars)});
        auto r = integral_section_residual(j, prolong_section(phi));
        REQUIRE(r.all_zero());
    }
    SECTION("worked branch-b connection with the closed-form solution") {
        ChartSpec e_chart({"x1", "x2"}, {"y1", "y2"});
        auto vars = e_chart.coordinate_set();
        ConnectionE c(e_chart,
                      {parse("y1 - x1 - x2", vars),
                       parse("y1^2 - x1^2 - x2^2 - 2*x1 - 2*x2 - 2*x1*x2", vars),
                       parse("-y2 + x1 + x2", vars), Expr::num(1)});
        ChartSpec ref = ChartSpec::jet_chart({"x1", "x2"}, {"y1", "y2"});
        Section phi(ref, {parse("x1 + x2 + 1", base_vars),
                          parse("x1 + x2 - 1 + 2*exp(-x1)", base_vars)});
        Section phi_e(ref, phi.f);
        auto r = integral_section_residual(c, Section(ref, phi.f));
        // Substitution happens against the connection chart's fiber names.
        for (const Expr& e : r) REQUIRE(verdict_zero(is_zero(e)));
    }
    SECTION("perturbation shows up as its derivative") {
        JetFieldJ1 j = JetFieldJ1::trivial_sopde(chart);
        Section phi(chart, {parse("x1 + x2", base_vars)});
        JetSection psi = prolong_section(phi);
        std::vector<Expr> g = psi.g;
        g[0] = g[0] + parse("1/10*x1^2", base_vars);
        JetSection perturbed(chart, psi.f, g);
        auto r = integral_section_residual(j, perturbed);
        // First-group residual in (A=0, mu=0): df/dx1 - v with v = g + eps.
        REQUIRE(proven_zero(r.first[0] + parse("1/10*x1^2", base_vars)));
        // Second group picks up the derivative of the perturbation.
        REQUIRE(proven_zero(r.second[0] - parse("2/10*x1", base_vars)));
    }
}

TEST_CASE("sopde integrability conditions") {
    ChartSpec chart = ChartSpec::jet_chart({"x1", "x2"}, {"y1"});

    SECTION("constant symmetric G satisfies everything") {
        JetFieldJ1 j = JetFieldJ1::trivial_sopde(chart);
        std::vector<Expr> g(4, Expr::num(0));
        g[0 * 2 + 1] = Expr::num(5);  // G^1_{01}
        g[1 * 2 + 0] = Expr::num(5);  // G^1_{10}
        auto conds = sopde_integrability_conditions(JetFieldJ1(chart, j.F, g));
        REQUIRE(conds.symmetry.size() == 1);   // Nm(m-1)/2 = 1
        REQUIRE(conds.pde.size() == 2);        // Nm^2(m-1)/2 = 2
        for (const Expr& e : conds.symmetry) REQUIRE(proven_zero(e));
        for (const Expr& e : conds.pde) REQUIRE(proven_zero(e));
    }
    SECTION("asymmetric G fails the linear relations") {
        JetFieldJ1 j = JetFieldJ1::trivial_sopde(chart);
        std::vector<Expr> g(4, Expr::num(0));
        g[0 * 2 + 1] = Expr::num(1);  // G^1_{01} = 1, G^1_{10} = 0
        auto conds = sopde_integrability_conditions(JetFieldJ1(chart, j.F, g));
        REQUIRE(proven_zero(conds.symmetry[0] * conds.symmetry[0] - Expr::num(1)));
    }
    SECTION("non-SOPDE input is rejected") {
        JetFieldJ1 j = JetFieldJ1::trivial_sopde(chart);
        std::vector<Expr> f = j.F;
        f[0] = Expr::num(0);
        REQUIRE_THROWS_AS(sopde_integrability_conditions(JetFieldJ1(chart, f, j.G)), ChartError);
    }
}
