#include <catch2/catch_amalgamated.hpp>

#include "dsrc/dsrc.hpp"
#include "dsrc/repro/oracles.hpp"

using namespace dsrc;

namespace {

struct Setup {
    TimeGrid grid;
    ControlLattice lattice;
    LatticeControl control;
    Setup(const TimeGrid& g)
        : grid(g), lattice(singleton_lattice({0.0}, g.t0())),
          control(lattice, lattice.intervals_from(g.t0(), g.horizon()), 0) {}
};

PathEnsemble frozen_ensemble(const TimeGrid& grid, const LatticeControl& control,
                             double x0 = 1.0, std::size_t paths = 4) {
    return simulate(make_coefficients("zero", {}), PathSegment::constant_initial(grid, x0),
                    control, grid, paths, 11);
}

} // namespace

TEST_CASE("implicit scalar step") {
    const PathSegment seg = PathSegment::constant(0.0, 0.1, 0, 0.0);
    const std::vector<double> z, v{0.0};
    SECTION("zero driver returns the input") {
        const GeneratorSpec gen = make_y_generator([](double) { return 0.0; },
                                                   nullptr, 0.0, 0.0, 1.0);
        CHECK(implicit_scalar_step(0.7, 0.0, seg, z, v, gen, 0.1) == 0.7);
    }
    SECTION("linear driver has the closed-form root") {
        const GeneratorSpec gen = make_y_generator([](double y) { return -y; },
                                                   nullptr, 0.0, 1.0, 1.0);
        CHECK(implicit_scalar_step(1.0, 0.0, seg, z, v, gen, 0.1) ==
              Catch::Approx(1.0 / 1.1).epsilon(1e-12));
    }
    SECTION("non-Lipschitz cubic root matches an independent bisection oracle") {
        const GeneratorSpec gen = make_y_generator([](double y) { return -y * y * y; },
                                                   nullptr, 0.0, 1.0, 3.0);
        const double root = implicit_scalar_step(2.0, 0.0, seg, z, v, gen, 0.5);
        const double oracle = bisection_root(
            [](double y) { return y + 0.5 * y * y * y - 2.0; }, 0.0, 2.0, 1e-14);
        CHECK(root == Catch::Approx(oracle).margin(1e-10));
    }
    SECTION("well-posedness margin h mu < 1 is enforced") {
        const GeneratorSpec gen = make_y_generator([](double y) { return 20.0 * y; },
                                                   nullptr, 20.0, 20.0, 1.0);
        CHECK_THROWS_AS(implicit_scalar_step(1.0, 0.0, seg, z, v, gen, 0.1),
                        ConfigError);
    }
    SECTION("non-finite driver values abort") {
        const GeneratorSpec gen = make_y_generator(
            [](double y) { return std::log(y); }, nullptr, 0.0, 1.0, 1.0);
        CHECK_THROWS_AS(implicit_scalar_step(-3.0, 0.0, seg, z, v, gen, 0.5),
                        NumericError);
    }
}

TEST_CASE("constant terminal with zero driver is reproduced exactly") {
    // Even on a noisy ensemble: the conditional expectation of a constant
    // is taken exactly, so Y = c and Z = 0 at every node, bit for bit.
    const TimeGrid grid = make_grid_no_delay(0.0, 1.0, 0.1);
    Setup s(grid);
    const PathEnsemble ens =
        simulate(make_coefficients("gbm", {{"a", 0.1}, {"sigma0", 0.3}}),
                 PathSegment::constant_initial(grid, 1.0), s.control, grid, 64, 21);
    const GeneratorSpec gen =
        make_generator("zero", {}, make_terminal("const", {{"c", 2.5}}));
    const BsdeSolution sol = solve(ens, gen, s.control);
    for (std::size_t p = 0; p < sol.n_paths; ++p)
        for (std::size_t j = 0; j <= grid.n_steps(); ++j) {
            CHECK(sol.y_at(p, j) == 2.5);
            for (double zc : sol.z_at(p, j)) CHECK(zc == 0.0);
        }
}

TEST_CASE("terminal consistency is bit-exact") {
    const TimeGrid grid = make_grid_no_delay(0.0, 1.0, 0.05);
    Setup s(grid);
    const PathEnsemble ens =
        simulate(make_coefficients("gbm", {{"a", 0.2}, {"sigma0", 0.3}}),
                 PathSegment::constant_initial(grid, 1.0), s.control, grid, 128, 5);
    const GeneratorSpec gen = make_generator(
        "damped_state", {{"mu", -1.0}, {"k", 0.5}},
        make_terminal("shifted_tanh", {{"c0", 0.0}, {"c1", 1.0}}));
    const BsdeSolution sol = solve(ens, gen, s.control);
    PathSegment seg;
    for (std::size_t p = 0; p < sol.n_paths; ++p) {
        fill_segment(ens, p, grid.end_node(), seg);
        CHECK(sol.y_at(p, grid.n_steps()) == gen.phi(seg));
    }
}

TEST_CASE("linear-driver oracle and first-order convergence") {
    std::vector<double> errors;
    for (double h : {0.04, 0.02, 0.01}) {
        const TimeGrid grid = make_grid_no_delay(0.0, 1.0, h);
        Setup s(grid);
        const PathEnsemble ens = frozen_ensemble(grid, s.control);
        const GeneratorSpec gen = make_generator(
            "linear_y", {{"mu", -1.0}}, make_terminal("const", {{"c", 1.0}}));
        const BsdeSolution sol = solve(ens, gen, s.control);
        errors.push_back(std::abs(initial_value(sol).value - std::exp(-1.0)));
    }
    CHECK(errors[2] <= 5e-3);
    const double slope = std::log2(errors[0] / errors[2]) / 2.0;
    INFO("errors " << errors[0] << " " << errors[1] << " " << errors[2]);
    CHECK(slope >= 0.8);
}

TEST_CASE("zero driver recovers the martingale mean exactly") {
    // With g = 0 every backward step is a least-squares fit with intercept,
    // which preserves the sample mean; Y(0) must equal mean Phi(X_T) to
    // rounding, and both sit within 3 standard errors of x0 e^{aT}.
    const double a = 0.05, sigma0 = 0.2;
    const TimeGrid grid = make_grid_no_delay(0.0, 1.0, 0.01);
    Setup s(grid);
    const PathEnsemble ens =
        simulate(make_coefficients("gbm", {{"a", a}, {"sigma0", sigma0}}),
                 PathSegment::constant_initial(grid, 1.0), s.control, grid, 20000, 29);
    const GeneratorSpec gen = make_generator("zero", {}, make_terminal("last_value", {}));
    const BsdeSolution sol = solve(ens, gen, s.control);
    const InitialValue iv = initial_value(sol);

    double phi_mean = 0.0;
    for (std::size_t p = 0; p < ens.n_paths; ++p)
        phi_mean += ens.state(p, grid.end_node(), 0);
    phi_mean /= static_cast<double>(ens.n_paths);
    CHECK(iv.value == Catch::Approx(phi_mean).margin(1e-10));
    CHECK(std::abs(iv.value - std::exp(a)) <= 3.0 * iv.stderr_estimate + 1e-3);
}

TEST_CASE("monotone damping shrinks the initial value with the horizon") {
    std::vector<double> values;
    for (double horizon : {0.5, 1.0, 2.0}) {
        const TimeGrid grid = make_grid_no_delay(0.0, horizon, 0.01);
        Setup s(grid);
        const PathEnsemble ens = frozen_ensemble(grid, s.control);
        const GeneratorSpec gen = make_generator(
            "linear_y", {{"mu", -1.0}}, make_terminal("const", {{"c", 1.0}}));
        values.push_back(std::abs(initial_value(solve(ens, gen, s.control)).value));
    }
    CHECK(values[0] > values[1]);
    CHECK(values[1] > values[2]);
}

TEST_CASE("comparison theorem as an executable check") {
    const TimeGrid grid = make_grid_no_delay(0.0, 1.0, 0.015625);  // h = 1/64
    Setup s(grid);
    SECTION("additive terminal shift: ordered everywhere, gap exactly one at T") {
        const PathEnsemble ens =
            simulate(make_coefficients("gbm", {{"a", 0.1}, {"sigma0", 0.25}}),
                     PathSegment::constant_initial(grid, 1.0), s.control, grid, 512, 3);
        const GeneratorSpec g1 = make_generator(
            "damped_state", {{"mu", -1.0}, {"k", 0.5}},
            make_terminal("shifted_tanh", {{"c0", 0.0}, {"c1", 1.0}}));
        const GeneratorSpec g2 = make_generator(
            "damped_state", {{"mu", -1.0}, {"k", 0.5}},
            make_terminal("shifted_tanh", {{"c0", 1.0}, {"c1", 1.0}}));
        const BsdeSolution s1 = solve(ens, g1, s.control);
        const BsdeSolution s2 = solve(ens, g2, s.control);
        const ComparisonReport rep = comparison_check(s1, s2, g1, g2, ens, s.control, 1.0);
        CHECK(rep.applicable);
        CHECK(rep.violations == 0);
        CHECK(rep.terminal_gap_min == Catch::Approx(1.0).margin(1e-12));
        for (std::size_t p = 0; p < s1.n_paths; ++p)
            CHECK(s2.y_at(p, grid.n_steps()) - s1.y_at(p, grid.n_steps()) ==
                  Catch::Approx(1.0).margin(1e-15));
    }
    SECTION("constant driver shift integrates to T on deterministic dynamics") {
        const PathEnsemble ens = frozen_ensemble(grid, s.control);
        const GeneratorSpec g1 = make_generator(
            "linear_y", {{"mu", 0.0}}, make_terminal("const", {{"c", 0.5}}));
        const GeneratorSpec g2 = make_generator(
            "linear_y", {{"mu", 0.0}, {"c", 1.0}}, make_terminal("const", {{"c", 0.5}}));
        const BsdeSolution s1 = solve(ens, g1, s.control);
        const BsdeSolution s2 = solve(ens, g2, s.control);
        CHECK(initial_value(s2).value - initial_value(s1).value ==
              Catch::Approx(1.0).margin(1e-12));
        const ComparisonReport rep = comparison_check(s1, s2, g1, g2, ens, s.control, 1.0);
        CHECK(rep.applicable);
        CHECK(rep.violations == 0);
    }
    SECTION("identical generators give zero violations exactly") {
        const PathEnsemble ens =
            simulate(make_coefficients("gbm", {{"a", 0.1}, {"sigma0", 0.25}}),
                     PathSegment::constant_initial(grid, 1.0), s.control, grid, 256, 3);
        const GeneratorSpec g = make_generator(
            "damped_state", {}, make_terminal("shifted_tanh", {{"c1", 1.0}}));
        const BsdeSolution s1 = solve(ens, g, s.control);
        const BsdeSolution s2 = solve(ens, g, s.control);
        const ComparisonReport rep =
            comparison_check(s1, s2, g, g, ens, s.control, 0.0);
        CHECK(rep.applicable);
        CHECK(rep.violations == 0);
    }
    SECTION("violated ordering precondition is reported, not judged") {
        const PathEnsemble ens = frozen_ensemble(grid, s.control);
        const GeneratorSpec g1 = make_generator(
            "linear_y", {{"mu", 0.0}, {"c", 1.0}}, make_terminal("const", {{"c", 0.5}}));
        const GeneratorSpec g2 = make_generator(
            "linear_y", {{"mu", 0.0}}, make_terminal("const", {{"c", 0.5}}));
        const BsdeSolution s1 = solve(ens, g1, s.control);
        const BsdeSolution s2 = solve(ens, g2, s.control);
        const ComparisonReport rep = comparison_check(s1, s2, g1, g2, ens, s.control, 1.0);
        CHECK_FALSE(rep.applicable);
        CHECK(rep.precondition_witness.find("g1 > g2") != std::string::npos);
    }
}

TEST_CASE("estimate audit") {
    const TimeGrid grid = make_grid_no_delay(0.0, 1.0, 0.05);
    Setup s(grid);
    SECTION("constant solution: E sup |Y|^2 = c^2 exactly") {
        const PathEnsemble ens = frozen_ensemble(grid, s.control);
        const GeneratorSpec gen =
            make_generator("zero", {}, make_terminal("const", {{"c", -3.0}}));
        const BsdeSolution sol = solve(ens, gen, s.control);
        const auto report = estimate_audit(
            sol, [&](const PathSegment&) { return 0.0; }, {});
        CHECK(report.mean_sup_y_sq == 9.0);
    }
    SECTION("1-Lipschitz clamped terminal on frozen paths: ratio at most one") {
        const GeneratorSpec gen = make_generator(
            "zero", {}, make_terminal("clamped_last", {{"lo", -1.0}, {"hi", 1.0}}));
        auto resolve = [&](const PathSegment& init) {
            const PathEnsemble ens = simulate(make_coefficients("zero", {}), init,
                                              s.control, grid, 4, 11);
            return initial_value(solve(ens, gen, s.control)).value;
        };
        const PathEnsemble base = frozen_ensemble(grid, s.control, 0.2);
        const BsdeSolution sol = solve(base, gen, s.control);
        const auto report = estimate_audit(
            sol, resolve,
            {{PathSegment::constant_initial(grid, 0.2),
              PathSegment::constant_initial(grid, 0.9)},
             {PathSegment::constant_initial(grid, -0.4),
              PathSegment::constant_initial(grid, 0.4)}});
        CHECK(report.max_continuity_ratio <= 1.0 + 1e-12);
    }
    SECTION("damped driver never exceeds the undamped bound") {
        const PathEnsemble ens = frozen_ensemble(grid, s.control);
        const GeneratorSpec damped = make_generator(
            "linear_y", {{"mu", -1.0}}, make_terminal("const", {{"c", 2.0}}));
        const BsdeSolution sol = solve(ens, damped, s.control);
        const auto report = estimate_audit(
            sol, [&](const PathSegment&) { return 0.0; }, {});
        CHECK(report.mean_sup_y_sq <= 4.0 + 1e-12);
    }
}

TEST_CASE("regression handles collinear designs by projection") {
    // Features 1, x, 2x: exactly dependent; fitted values must match the
    // two-column design (projection is unique even when beta is not).
    const std::size_t paths = 64;
    std::vector<double> collinear(paths * 2), reduced(paths);
    SequenceRng rng(91);
    std::vector<double> response(paths);
    for (std::size_t p = 0; p < paths; ++p) {
        const double x = rng.uniform(-1.0, 1.0);
        collinear[p * 2] = x;
        collinear[p * 2 + 1] = 2.0 * x;
        reduced[p] = x;
        response[p] = 0.5 + 1.5 * x + 0.1 * rng.normal();
    }
    const StepRegression full(collinear, paths, 2);
    const StepRegression slim(reduced, paths, 1);
    std::vector<double> fit_full(paths), fit_slim(paths);
    full.fit(response, fit_full);
    slim.fit(response, fit_slim);
    CHECK(full.truncated_directions() == 1);
    for (std::size_t p = 0; p < paths; ++p)
        CHECK(fit_full[p] == Catch::Approx(fit_slim[p]).margin(1e-9));
}

TEST_CASE("explicit negative control oscillates where the implicit step is stable") {
    const TimeGrid grid = make_grid_no_delay(0.0, 1.0, 0.5);
    Setup s(grid);
    const PathEnsemble ens = frozen_ensemble(grid, s.control);
    const GeneratorSpec gen =
        make_generator("cubic_decay", {}, make_terminal("const", {{"c", 2.0}}));
    const double oracle =
        rk4_integrate([](double, double y) { return -y * y * y; }, 2.0, 0.0, 1.0, 20000);

    BsdeConfig explicit_cfg;
    explicit_cfg.scheme = BsdeScheme::ExplicitY;
    const double y_explicit =
        initial_value(solve(ens, gen, s.control, explicit_cfg)).value;
    const double y_implicit = initial_value(solve(ens, gen, s.control)).value;
    CHECK(y_explicit == 2.0);  // the 2 -> -2 -> 2 cycle
    CHECK(std::abs(y_explicit - oracle) / oracle >= 0.5);
    CHECK(std::abs(y_implicit - oracle) / oracle <= 0.35);
}
