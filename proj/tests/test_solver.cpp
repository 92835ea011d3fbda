#include "dense_oracle.hpp"
#include "fixtures.hpp"
#include "random_problems.hpp"

#include "vascutherm/analysis.hpp"
#include "vascutherm/solver.hpp"

#include <doctest.h>

using namespace vascutherm;

TEST_SUITE("solver") {

TEST_CASE("pure convection gives the closed form")
{
    auto p = fixtures::plate(0.1, 20, 130.0, 300.0);
    const auto field = solve_linear(p);
    CHECK(field.values.size() == p.mesh->num_nodes());
    CHECK((field.values.array() / 310.0 - 1.0).abs().maxCoeff() <= 1e-8);
    CHECK(field.info.iterations == 0);
}

TEST_CASE("no sources and an ambient inlet leave the plate at ambient")
{
    for (double mdot : {0.0, 1e-5, 1e-3}) {
        auto p = fixtures::plate(0.1, 8, 0.0, 293.0);
        fixtures::add_straight_channel(p, mdot, 293.0);
        const auto field = solve(p);
        CHECK((field.values.array() - 293.0).abs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("baseline plate with a straight channel matches the dense solve")
{
    auto p = fixtures::plate(0.1, 3, 500.0, 298.15);
    const std::vector<Eigen::Vector2d> w{{0.0, 0.1 / 3.0}, {0.1, 0.1 / 3.0}};
    p.path = embed_vasculature(*p.mesh, w);
    p.flow = {fixtures::baseline_mdot, fixtures::water_cf, 315.0};
    const auto field = solve_linear(p);
    const auto ref = oracle::solve_dense(p);
    CHECK((field.values - ref).cwiseAbs().maxCoeff() <= 1e-10 * ref.cwiseAbs().maxCoeff());
    CHECK(field[p.path->inlet()] == 315.0);
}

TEST_CASE("linear solves agree with the dense oracle")
{
    testgen::Rng rng(3);
    int solved = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const auto p = testgen::random_small_problem(rng);
        if (!validate(p).empty())
            continue;
        const auto field = solve_linear(p);
        const auto ref = oracle::solve_dense(p);
        CHECK((field.values - ref).cwiseAbs().maxCoeff() <= 1e-10 * std::max(ref.cwiseAbs().maxCoeff(), 1.0));
        for (const auto& [v, value] : oracle::constraints(p))
            CHECK(field[v] == value);
        ++solved;
    }
    CHECK(solved >= 30);
}

TEST_CASE("pure Neumann without convection is singular")
{
    auto p = fixtures::plate(0.1, 4, 10.0, 300.0);
    p.material.convection_coefficient = 0.0;
    try {
        solve_linear(p);
        FAIL("expected singular-system");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::singular_system);
        CHECK(std::string(e.what()).find("Neumann") != std::string::npos);
    }
    // A prescribed edge removes the nullspace.
    auto q = fixtures::plate(0.1, 4, 10.0, 300.0, PrescribedTemperature{300.0});
    q.material.convection_coefficient = 0.0;
    CHECK_NOTHROW(solve_linear(q));
}

TEST_CASE("uniform radiative problem converges to the HSS root")
{
    const auto p = fixtures::uniform_radiative(10);
    const auto field = solve(p);
    const double hss = hss_temperature(500.0, fixtures::baseline_h, fixtures::baseline_emissivity, kStefanBoltzmann,
                                       298.15);
    CHECK(hss == doctest::Approx(323.8).epsilon(0.05 / 323.8));
    CHECK((field.values.array() - hss).abs().maxCoeff() <= 1e-10 * hss);
    CHECK(field.info.iterations >= 2);
    CHECK(field.info.residual_history.size() == static_cast<std::size_t>(field.info.iterations) + 1);
    CHECK(field.values.minCoeff() >= 0.0);
}

TEST_CASE("zero emissivity with the flag on equals the linear solve")
{
    auto p = fixtures::plate(0.1, 6, 300.0, 295.0);
    fixtures::add_straight_channel(p, 1e-4, 285.0);
    auto q = p;
    q.radiation_enabled = true;
    q.material.emissivity = 0.0;
    CHECK((solve(q).values - solve_linear(p).values).cwiseAbs().maxCoeff() <= 1e-12 * 400.0);
    CHECK((solve_radiative(q).values - solve_linear(p).values).cwiseAbs().maxCoeff() <= 1e-12 * 400.0);
}

TEST_CASE("radiative solve matches a dense Newton reference")
{
    testgen::Rng rng(5);
    for (int trial = 0; trial < 6; ++trial) {
        auto p = testgen::random_principle_problem(rng, 1, true);
        const auto field = solve(p);
        // Residual of the dense oracle at the sparse solution, free rows only.
        const auto sys = oracle::assemble_dense(p);
        const auto [rr, rj] = oracle::radiation_dense(p, field.values);
        const Eigen::VectorXd r = sys.matrix * field.values - sys.load + rr;
        const auto fixed = oracle::constraints(p);
        double worst = 0.0;
        for (Index v = 0; v < r.size(); ++v)
            if (!fixed.contains(v))
                worst = std::max(worst, std::abs(r(v)));
        CHECK(worst <= 1e-8 * sys.load.cwiseAbs().maxCoeff());
        CHECK(field.values.minCoeff() >= 0.0);
    }
}

TEST_CASE("observer sees every Newton step")
{
    auto p = fixtures::uniform_radiative(4);
    SolveSettings s;
    std::vector<int> seen;
    s.observer = [&](int k, const Eigen::VectorXd& theta) {
        seen.push_back(k);
        CHECK(theta.size() == p.mesh->num_nodes());
    };
    const auto field = solve(p, s);
    CHECK(static_cast<int>(seen.size()) == field.info.iterations);
    CHECK(field.info.update_history.size() == seen.size());
}

TEST_CASE("iteration cap raises no-convergence with history")
{
    auto p = fixtures::uniform_radiative(4);
    SolveSettings s;
    s.max_newton_iters = 1;
    try {
        solve(p, s);
        FAIL("expected no-convergence");
    } catch (const NoConvergenceError& e) {
        CHECK(e.code() == ErrorCode::no_convergence);
        CHECK(e.residual_history().size() >= 2);
    }
}

TEST_CASE("guess handling")
{
    auto p = fixtures::uniform_radiative(4);
    const Index n = p.mesh->num_nodes();
    CHECK_THROWS_AS(solve_radiative(p, {}, Eigen::VectorXd::Constant(n, -1.0)), Error);
    CHECK_THROWS_AS(solve_radiative(p, {}, Eigen::VectorXd::Constant(n + 1, 300.0)), Error);
    const auto a = solve_radiative(p, {}, Eigen::VectorXd::Constant(n, 0.0));
    const auto b = solve_radiative(p, {}, Eigen::VectorXd::Constant(n, 1000.0));
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("settings are checked")
{
    SolveSettings s;
    CHECK_NOTHROW(s.check());
    s.linear_tolerance = 0.0;
    CHECK_THROWS_AS(s.check(), Error);
    s = {};
    s.newton_tolerance = 1.0;
    CHECK_THROWS_AS(s.check(), Error);
    s = {};
    s.max_newton_iters = 0;
    CHECK_THROWS_AS(s.check(), Error);
    s = {};
    s.max_halvings = -1;
    CHECK_THROWS_AS(s.check(), Error);
    CHECK_THROWS_AS(solve_linear(fixtures::uniform_radiative(2)), Error);
}

TEST_CASE("solves are bit-reproducible")
{
    testgen::Rng rng(99);
    auto p = testgen::random_principle_problem(rng, 1, true);
    const auto a = solve(p);
    const auto b = solve(p);
    CHECK(a.values == b.values);
    CHECK(a.info.residual_history == b.info.residual_history);
}

} // TEST_SUITE
