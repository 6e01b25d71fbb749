#include <catch2/catch_amalgamated.hpp>

#include "mvf/lagrangian.hpp"
#include "mvf/parse.hpp"
#include "mvf/singular.hpp"
#include "support.hpp"

#include <random>

using namespace mvf;
using mvftest::proven_zero;

namespace {

ChartSpec scalar_chart_m2() { return ChartSpec::jet_chart({"x0", "x1"}, {"y"}); }

/// 1/2 sum of squared velocities plus a potential f(y...), orthonormal case.
Lagrangian orthonormal_lagrangian(const ChartSpec& chart, const Expr& f) {
    std::vector<Expr> parts{f};
    for (std::size_t a = 0; a < chart.fiber_dim(); ++a)
        for (std::size_t mu = 0; mu < chart.m(); ++mu)
            parts.push_back(Expr::constant(Rational(1, 2)) *
                            pow(Expr::var(chart.jet_name(a, mu)), 2));
    return Lagrangian(chart, Expr::sum(std::move(parts)));
}

Lagrangian random_lagrangian(std::mt19937& rng, const ChartSpec& chart, int degree) {
    auto coords = chart.coordinates();
    std::vector<std::string> names(coords.begin(), coords.end());
    return Lagrangian(chart, mvftest::random_poly(rng, names, degree, 5));
}

}  // namespace

TEST_CASE("poincare_cartan tables") {
    SECTION("free particle in mechanics form") {
        ChartSpec chart = ChartSpec::jet_chart({"x"}, {"y"});
        Lagrangian lag(chart, parse("1/2*v1_1^2", chart.coordinate_set()));
        PCForms pc = poincare_cartan(lag);
        // Theta = v dy - 1/2 v^2 dx.
        REQUIRE(proven_zero(pc.theta.coefficient(CobasisMask(1) << 1) - Expr::var("v1_1")));
        REQUIRE(proven_zero(pc.theta.coefficient(CobasisMask(1) << 0) +
                            parse("1/2*v1_1^2", chart.coordinate_set())));
    }
    SECTION("pure potential density") {
        ChartSpec chart = scalar_chart_m2();
        auto vars = chart.coordinate_set();
        Lagrangian lag(chart, parse("y^3", vars));
        PCForms pc = poincare_cartan(lag);
        // Theta = f d^2x.
        REQUIRE(proven_zero(pc.theta.coefficient(0b011) - parse("y^3", vars)));
        // Omega = -f'(y) dy ^ d^2x, stored on the ascending mask {x0, x1, y}.
        REQUIRE(proven_zero(pc.omega.coefficient(0b111) + parse("3*y^2", vars)));
    }
    SECTION("omega table equals -d(theta) on random Lagrangians") {
        std::mt19937 rng(65537);
        ChartSpec charts[2] = {scalar_chart_m2(),
                               ChartSpec::jet_chart({"x0", "x1"}, {"y1", "y2"})};
        for (int i = 0; i < 12; ++i) {
            Lagrangian lag = random_lagrangian(rng, charts[i % 2], 3);
            PCForms pc = poincare_cartan(lag);  // internal assertion does the check
            AdaptedForm diff = pc.omega - (-exterior_derivative(pc.theta));
            for (const auto& [mask, c] : diff.terms()) REQUIRE(proven_zero(c));
        }
    }
}

TEST_CASE("regularity verdicts") {
    ChartSpec chart = scalar_chart_m2();
    auto vars = chart.coordinate_set();

    SECTION("orthonormal case is regular with unit determinant") {
        RegularityResult r = regularity(orthonormal_lagrangian(chart, Expr::num(0)));
        REQUIRE(r.verdict == RegularityVerdict::Regular);
        REQUIRE(r.det == Expr::num(1));
        REQUIRE(proven_zero(r.hess.at(0, 0, 0, 0) - Expr::num(1)));
        REQUIRE(proven_zero(r.hess.at(0, 0, 0, 1)));
    }
    SECTION("affine density is singular") {
        RegularityResult r = regularity(Lagrangian(chart, parse("v1_1", vars)));
        REQUIRE(r.verdict == RegularityVerdict::Singular);
        REQUIRE(is_zero(r.det) == Verdict::ProvenZero);
    }
    SECTION("missing velocity dependence is singular") {
        RegularityResult r = regularity(Lagrangian(chart, parse("1/2*v1_1^2", vars)));
        REQUIRE(r.verdict == RegularityVerdict::Singular);
    }
    SECTION("variable determinant is a pointwise statement") {
        RegularityResult r =
            regularity(Lagrangian(chart, parse("1/2*y*v1_1^2 + 1/2*v1_2^2", vars)));
        REQUIRE(r.verdict == RegularityVerdict::Pointwise);
        REQUIRE(proven_zero(r.det - Expr::var("y")));
    }
}

TEST_CASE("el_system") {
    ChartSpec chart = scalar_chart_m2();
    auto vars = chart.coordinate_set();

    SECTION("orthonormal dim-2 system is the trace equation") {
        Lagrangian lag = orthonormal_lagrangian(chart, parse("y^2", vars));
        ELSystem sys = el_system(lag);
        REQUIRE(sys.coeff.size() == 1);
        REQUIRE(sys.coeff[0].size() == 4);
        // residual == df/dy - G^B_00 - G^B_11 with symbolic unknowns.
        std::vector<Expr> parts{sys.rhs[0]};
        for (std::size_t k = 0; k < 4; ++k)
            parts.push_back(-(sys.coeff[0][k] * Expr::var(sys.unknown_name(k))));
        Expr residual = Expr::sum(std::move(parts));
        Expr reference = parse("2*y", vars) - Expr::var("G1_1_1") - Expr::var("G1_2_2");
        REQUIRE(proven_zero(residual - reference));
    }
    SECTION("pure potential contributes only the right-hand side") {
        Lagrangian lag(chart, parse("y^2", vars));
        ELSystem sys = el_system(lag);
        for (const Expr& c : sys.coeff[0]) REQUIRE(proven_zero(c));
        REQUIRE(proven_zero(sys.rhs[0] - parse("2*y", vars)));
    }
    SECTION("general quadratic coefficient arrangement") {
        // L = 1/2 (v0 - x1)^2 + (v0 - x1)(v1 - x0) + (v1 - x0)^2 + y^2
        Expr a = parse("v1_1 - x1", vars), b = parse("v1_2 - x0", vars);
        Lagrangian lag(chart, Expr::constant(Rational(1, 2)) * a * a + a * b + b * b +
                                  parse("y^2", vars));
        ELSystem sys = el_system(lag);
        // Hessian in (v0, v1) is [[1, 1], [1, 2]]; the system couples both.
        REQUIRE(proven_zero(sys.coeff[0][sys.unknown_index(0, 0, 0)] - Expr::num(1)));
        REQUIRE(proven_zero(sys.coeff[0][sys.unknown_index(0, 1, 1)] - Expr::num(2)));
        REQUIRE(proven_zero(sys.coeff[0][sys.unknown_index(0, 0, 1)] - Expr::num(1)));
    }
}

TEST_CASE("el_system agrees with the direct contraction i(X)Omega_L") {
    std::mt19937 rng(271828);
    ChartSpec chart = scalar_chart_m2();
    for (int trial = 0; trial < 6; ++trial) {
        Lagrangian lag = random_lagrangian(rng, chart, 2);
        PCForms pc = poincare_cartan(lag);
        ELSystem sys = el_system(lag);

        // SOPDE multivector with symbolic G entries.
        std::vector<VectorField> fs;
        for (std::size_t mu = 0; mu < 2; ++mu) {
            VectorField x(chart);
            x.set(mu, Expr::num(1));
            x.set("y", Expr::var(chart.jet_name(0, mu)));
            for (std::size_t rho = 0; rho < 2; ++rho)
                x.set(chart.jet_index(0, rho),
                      Expr::var(sys.unknown_name(sys.unknown_index(0, rho, mu))));
            fs.push_back(std::move(x));
        }
        AdaptedForm contracted = contract(pc.omega, DecomposableMVF(chart, fs));
        REQUIRE(contracted.degree() == 1);

        // dv coefficients vanish for a SOPDE.
        for (std::size_t rho = 0; rho < 2; ++rho)
            REQUIRE(proven_zero(
                contracted.coefficient(CobasisMask(1) << chart.jet_index(0, rho))));

        // dy coefficient reproduces the linear system, up to one global sign.
        std::vector<Expr> parts{-sys.rhs[0]};
        for (std::size_t k = 0; k < 4; ++k)
            parts.push_back(sys.coeff[0][k] * Expr::var(sys.unknown_name(k)));
        Expr residual = Expr::sum(std::move(parts));
        Expr dy_coeff = contracted.coefficient(CobasisMask(1) << 2);
        bool plus = proven_zero(dy_coeff - residual);
        bool minus = proven_zero(dy_coeff + residual);
        REQUIRE((plus || minus));
    }
}

TEST_CASE("sopde forcing residuals") {
    ChartSpec chart = scalar_chart_m2();
    Lagrangian lag = orthonormal_lagrangian(chart, Expr::num(0));
    std::vector<Expr> f_v = JetFieldJ1::trivial_sopde(chart).F;

    SECTION("F = v gives zero residual") {
        for (const Expr& e : sopde_forcing_residuals(lag, f_v)) REQUIRE(proven_zero(e));
    }
    SECTION("perturbed F leaves a nonzero residual") {
        std::vector<Expr> f = f_v;
        f[0] = f[0] + Expr::num(1);
        auto res = sopde_forcing_residuals(lag, f);
        bool some_nonzero = false;
        for (const Expr& e : res)
            if (is_zero(e) == Verdict::ProvenNonzero) some_nonzero = true;
        REQUIRE(some_nonzero);
    }
}

TEST_CASE("solve_regular") {
    SECTION("orthonormal pivot expression and free count") {
        ChartSpec chart = scalar_chart_m2();
        auto vars = chart.coordinate_set();
        Lagrangian lag = orthonormal_lagrangian(chart, parse("y^2", vars));
        RegularityResult reg = regularity(lag);
        REQUIRE(reg.verdict == RegularityVerdict::Regular);
        ELSolutionFamily fam = solve_regular(el_system(lag), reg.hess);
        REQUIRE(fam.free_count() == 3);  // N(m^2-1)
        REQUIRE(fam.pivots.size() == 1);
        // G^B_00 = df/dy - G^B_11.
        Expr want = parse("2*y", vars) - Expr::var("G1_2_2");
        REQUIRE(proven_zero(fam.pivot_exprs[0] - want));
        REQUIRE(std::find(fam.free_names.begin(), fam.free_names.end(), "G1_2_2") !=
                fam.free_names.end());
    }
    SECTION("mechanics m = 1 has a unique solution") {
        ChartSpec chart = ChartSpec::jet_chart({"t"}, {"q"});
        auto vars = chart.coordinate_set();
        Lagrangian lag(chart, parse("1/2*v1_1^2 - q^2", vars));
        RegularityResult reg = regularity(lag);
        ELSolutionFamily fam = solve_regular(el_system(lag), reg.hess);
        REQUIRE(fam.free_count() == 0);
        REQUIRE(proven_zero(fam.pivot_exprs[0] - parse("-2*q", vars)));
    }
    SECTION("free counts N(m^2-1) for N = 1, 2, 3") {
        for (std::size_t n = 1; n <= 3; ++n) {
            std::vector<std::string> fibers;
            for (std::size_t a = 1; a <= n; ++a) fibers.push_back("y" + std::to_string(a));
            ChartSpec chart = ChartSpec::jet_chart({"x0", "x1"}, fibers);
            Lagrangian lag = orthonormal_lagrangian(chart, Expr::num(0));
            RegularityResult reg = regularity(lag);
            REQUIRE(reg.verdict == RegularityVerdict::Regular);
            ELSolutionFamily fam = solve_regular(el_system(lag), reg.hess);
            REQUIRE(fam.free_count() == n * 3);
        }
    }
    SECTION("any assignment of free unknowns solves the system") {
        std::mt19937 rng(5001);
        ChartSpec chart = scalar_chart_m2();
        auto coords = chart.coordinates();
        std::vector<std::string> names(coords.begin(), coords.end());
        Lagrangian lag = orthonormal_lagrangian(chart, parse("y^3", chart.coordinate_set()));
        RegularityResult reg = regularity(lag);
        ELSolutionFamily fam = solve_regular(el_system(lag), reg.hess);
        for (int i = 0; i < 5; ++i) {
            Bindings assign;
            for (const std::string& nm : fam.free_names)
                assign[nm] = mvftest::random_poly(rng, names, 2);
            auto rep = el_integrability_conditions(lag, fam, assign);
            for (const Expr& e : rep.el_residual) REQUIRE(proven_zero(e));
        }
    }
    SECTION("singular input is rejected") {
        ChartSpec chart = scalar_chart_m2();
        Lagrangian lag(chart, parse("1/2*v1_1^2", chart.coordinate_set()));
        RegularityResult reg = regularity(lag);
        REQUIRE_THROWS_AS(solve_regular(el_system(lag), reg.hess), Error);
    }
}

TEST_CASE("el_integrability_conditions on the dim-2 family") {
    ChartSpec chart = scalar_chart_m2();
    auto vars = chart.coordinate_set();
    Lagrangian lag = orthonormal_lagrangian(chart, Expr::num(0));
    RegularityResult reg = regularity(lag);
    ELSolutionFamily fam = solve_regular(el_system(lag), reg.hess);

    SECTION("constant trace-free G with symmetric off-diagonal is integrable") {
        Bindings assign{{"G1_1_2", Expr::num(0)},
                        {"G1_2_1", Expr::num(0)},
                        {"G1_2_2", Expr::num(-7)}};  // G00 = 7, G11 = -7
        auto rep = el_integrability_conditions(lag, fam, assign);
        REQUIRE(rep.all_zero());
    }
    SECTION("asymmetric off-diagonal fails the symmetry relation") {
        Bindings assign{{"G1_1_2", Expr::num(1)},
                        {"G1_2_1", Expr::num(0)},
                        {"G1_2_2", Expr::num(0)}};
        auto rep = el_integrability_conditions(lag, fam, assign);
        REQUIRE_FALSE(rep.all_zero());
        bool nonzero_sym = false;
        for (const Expr& e : rep.conditions.symmetry)
            if (is_zero(e) == Verdict::ProvenNonzero) nonzero_sym = true;
        REQUIRE(nonzero_sym);
    }
    SECTION("generic assignment reports nonzero PDE residuals as expressions") {
        Bindings assign{{"G1_1_2", Expr::num(0)},
                        {"G1_2_1", Expr::num(0)},
                        {"G1_2_2", parse("y", vars)}};
        auto rep = el_integrability_conditions(lag, fam, assign);
        bool nonzero_pde = false;
        for (const Expr& e : rep.conditions.pde)
            if (!verdict_zero(is_zero(e))) nonzero_pde = true;
        REQUIRE(nonzero_pde);
    }
}

TEST_CASE("dim-2 condition families match the hand-encoded references") {
    // References: with G^A_11 = d f/d y^A - G^A_00 eliminated,
    //   symmetry: G^B_01 - G^B_10
    //   family2:  X_0(G^B_10) - X_1(G^B_00)
    //   family3:  v^A_0 d2f/dy^A dy^B - X_0(G^B_00) - X_1(G^B_01)
    // where X_0 = d/dx0 + v^A_0 d/dy^A + G^A_00 d/dv^A_0 + G^A_01 d/dv^A_1,
    //       X_1 = d/dx1 + v^A_1 d/dy^A + G^A_10 d/dv^A_0 + (f_A - G^A_00) d/dv^A_1.
    std::mt19937 rng(333);
    for (std::size_t N : {std::size_t(1), std::size_t(2)}) {
        std::vector<std::string> fibers;
        for (std::size_t a = 1; a <= N; ++a) fibers.push_back("y" + std::to_string(a));
        ChartSpec chart = ChartSpec::jet_chart({"x0", "x1"}, fibers);
        auto coords = chart.coordinates();
        std::vector<std::string> names(coords.begin(), coords.end());
        std::vector<std::string> ynames(fibers);

        Expr f = mvftest::random_poly(rng, ynames, 3);
        Lagrangian lag = orthonormal_lagrangian(chart, f);
        RegularityResult reg = regularity(lag);
        ELSolutionFamily fam = solve_regular(el_system(lag), reg.hess);
        REQUIRE(fam.free_count() == N * 3);

        // Random polynomial assignment for the free unknowns.
        Bindings assign;
        for (const std::string& nm : fam.free_names) assign[nm] = mvftest::random_poly(rng, names, 2);
        auto rep = el_integrability_conditions(lag, fam, assign);

        // Instantiated coefficient tables G[a][direction][slot].
        JetFieldJ1 j = fam.jet_field(assign);
        auto G = [&](std::size_t a, std::size_t dir, std::size_t slot) {
            return j.g_at(a, dir, slot);
        };
        auto X_apply = [&](std::size_t dir, const Expr& e) {
            std::vector<Expr> parts{differentiate(e, chart.base()[dir])};
            for (std::size_t a = 0; a < N; ++a) {
                parts.push_back(Expr::var(chart.jet_name(a, dir)) *
                                differentiate(e, chart.fiber()[a]));
                for (std::size_t slot = 0; slot < 2; ++slot)
                    parts.push_back(G(a, dir, slot) * differentiate(e, chart.jet_name(a, slot)));
            }
            return Expr::sum(std::move(parts));
        };

        // Verify the engine's G^A_11 satisfies the eliminated form.
        for (std::size_t a = 0; a < N; ++a)
            REQUIRE(proven_zero(G(a, 1, 1) -
                                (differentiate(f, chart.fiber()[a]) - G(a, 0, 0))));

        // Symmetry family.
        REQUIRE(rep.conditions.symmetry.size() == N);
        for (std::size_t b = 0; b < N; ++b) {
            Expr ref = G(b, 1, 0) - G(b, 0, 1);
            REQUIRE(proven_zero(rep.conditions.symmetry[b] - ref));
        }
        // PDE families: engine order is (b, rho) with rho the slot.
        REQUIRE(rep.conditions.pde.size() == 2 * N);
        for (std::size_t b = 0; b < N; ++b) {
            Expr fam2 = X_apply(0, G(b, 1, 0)) - X_apply(1, G(b, 0, 0));
            REQUIRE(proven_zero(rep.conditions.pde[2 * b] - fam2));
            std::vector<Expr> parts;
            for (std::size_t a = 0; a < N; ++a)
                parts.push_back(Expr::var(chart.jet_name(a, 0)) *
                                differentiate(differentiate(f, chart.fiber()[a]),
                                              chart.fiber()[b]));
            Expr fam3 = Expr::sum(std::move(parts)) - X_apply(0, G(b, 0, 0)) -
                        X_apply(1, G(b, 0, 1));
            REQUIRE(proven_zero(rep.conditions.pde[2 * b + 1] - fam3));
        }
    }
}

TEST_CASE("singular algorithm") {
    ChartSpec chart = scalar_chart_m2();
    auto vars = chart.coordinate_set();

    SECTION("pure potential f = y: inconsistent, no solution") {
        SingularState st = singular_algorithm(Lagrangian(chart, parse("y", vars)));
        REQUIRE(st.verdict == SingularVerdict::NoSolution);
        REQUIRE_THAT(st.note, Catch::Matchers::ContainsSubstring("constant"));
    }
    SECTION("zero density: everything is free, no constraints") {
        SingularState st = singular_algorithm(Lagrangian(chart, Expr::num(0)));
        REQUIRE(st.verdict == SingularVerdict::FinalSubmanifold);
        REQUIRE(st.constraints.empty());
        REQUIRE(st.free_parameters.size() == 4);
    }
    SECTION("half squared single velocity reports the pivot structure") {
        SingularState st =
            singular_algorithm(Lagrangian(chart, parse("1/2*v1_1^2", vars)));
        REQUIRE(st.verdict == SingularVerdict::FinalSubmanifold);
        REQUIRE(st.constraints.empty());
        REQUIRE(st.parameter_values.count("G1_1_1"));
        REQUIRE(proven_zero(st.parameter_values.at("G1_1_1")));
        REQUIRE(st.free_parameters.size() == 3);
    }
    SECTION("quadratic potential cuts down to the zero section") {
        SingularState st = singular_algorithm(Lagrangian(chart, parse("y^2", vars)));
        REQUIRE(st.verdict == SingularVerdict::FinalSubmanifold);
        REQUIRE(st.constraints.size() == 3);  // y, v1_1, v1_2
        REQUIRE(st.free_parameters.empty());
        // All parameters were fixed to zero by the tangency condition.
        for (const auto& [name, val] : st.parameter_values) REQUIRE(proven_zero(val));
    }
    SECTION("two-step mode reaches the same final data") {
        SingularOptions opts;
        opts.mode = SingularMode::ConstraintFirst;
        SingularState st = singular_algorithm(Lagrangian(chart, parse("y^2", vars)), opts);
        REQUIRE(st.verdict == SingularVerdict::FinalSubmanifold);
        REQUIRE(st.constraints.size() == 3);
    }
    SECTION("regular input is rejected") {
        Lagrangian lag = orthonormal_lagrangian(chart, Expr::num(0));
        REQUIRE_THROWS_AS(singular_algorithm(lag), Error);
    }
}

TEST_CASE("el_residual_on_section") {
    ChartSpec chart = scalar_chart_m2();
    auto vars = chart.coordinate_set();
    auto base = std::set<std::string>{"x0", "x1"};

    SECTION("harmonic affine sections are critical for the free field") {
        Lagrangian lag = orthonormal_lagrangian(chart, Expr::num(0));
        Section phi(chart, {parse("2*x0 + 3*x1", base)});
        for (const Expr& e : el_residual_on_section(lag, phi)) REQUIRE(proven_zero(e));
    }
    SECTION("potential shows up as f'(phi) - laplacian(phi)") {
        Lagrangian lag = orthonormal_lagrangian(chart, parse("y^3", vars));
        Section phi(chart, {parse("x0^2", base)});
        auto r = el_residual_on_section(lag, phi);
        // f'(phi) = 3 x0^4; laplacian = 2.
        REQUIRE(proven_zero(r[0] - (parse("3*x0^4", base) - Expr::num(2))));
    }
    SECTION("density without y or v dependence is always critical") {
        Lagrangian lag(chart, parse("x0^2 + x1", vars));
        Section phi(chart, {parse("x0*x1", base)});
        for (const Expr& e : el_residual_on_section(lag, phi)) REQUIRE(proven_zero(e));
    }
    SECTION("section/field coherence chain") {
        // f = y: assignment with constant G, integrable; phi = (x0^2+x1^2)/4.
        Lagrangian lag = orthonormal_lagrangian(chart, parse("y", vars));
        RegularityResult reg = regularity(lag);
        ELSolutionFamily fam = solve_regular(el_system(lag), reg.hess);
        Bindings assign{{"G1_1_2", Expr::num(0)},
                        {"G1_2_1", Expr::num(0)},
                        {"G1_2_2", Expr::constant(Rational(1, 2))}};
        auto rep = el_integrability_conditions(lag, fam, assign);
        REQUIRE(rep.all_zero());
        JetFieldJ1 j = fam.jet_field(assign);
        Section phi(chart, {parse("1/4*x0^2 + 1/4*x1^2", base)});
        auto sec_res = integral_section_residual(j, prolong_section(phi));
        REQUIRE(sec_res.all_zero());
        for (const Expr& e : el_residual_on_section(lag, phi)) REQUIRE(proven_zero(e));
    }
}
