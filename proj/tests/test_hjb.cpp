#include <catch2/catch_amalgamated.hpp>

#include "dsrc/dsrc.hpp"

using namespace dsrc;

namespace {

ControlLattice u_values(std::vector<std::vector<double>> values) {
    ControlLattice lattice;
    lattice.values = std::move(values);
    lattice.switch_times = {0.0};
    return lattice;
}

} // namespace

TEST_CASE("lag projection") {
    const LagProjection proj({0, 2}, 1, 4, 0.1);
    SECTION("project and embed agree at the offsets exactly") {
        PathSegment seg = PathSegment::constant(0.5, 0.1, 4, 0.0);
        seg.values = {3.0, -1.0, 2.0, 0.5, 1.0};
        const auto coords = proj.project(seg);
        REQUIRE(coords.size() == 2);
        CHECK(coords[0] == 1.0);  // value at the anchor
        CHECK(coords[1] == 2.0);  // value two steps back
        const PathSegment back = proj.embed(0.5, coords);
        CHECK(back.current_scalar() == 1.0);
        CHECK(back.sample(2)[0] == 2.0);
    }
    SECTION("piecewise-linear fill between offsets, constant beyond") {
        const std::vector<double> coords{1.0, 3.0};
        const PathSegment seg = proj.embed(0.5, coords);
        CHECK(seg.sample(4)[0] == 1.0);  // anchor
        CHECK(seg.sample(3)[0] == 2.0);  // halfway
        CHECK(seg.sample(2)[0] == 3.0);  // the lagged offset
        CHECK(seg.sample(1)[0] == 3.0);  // constant before it
        CHECK(seg.sample(0)[0] == 3.0);
    }
    SECTION("offsets must start at zero and increase") {
        CHECK_THROWS_AS(LagProjection({1, 2}, 1, 4, 0.1), ConfigError);
        CHECK_THROWS_AS(LagProjection({0, 2, 2}, 1, 4, 0.1), ConfigError);
        CHECK_THROWS_AS(LagProjection({0, 5}, 1, 4, 0.1), ConfigError);
    }
}

TEST_CASE("hamiltonian evaluation") {
    const LagProjection proj({0}, 1, 0, 0.1);
    const PathSegment seg = PathSegment::constant(0.3, 0.1, 0, 0.7);
    SECTION("all-zero data gives zero") {
        Model m;
        m.coefficients = make_coefficients("zero", {});
        m.generator = make_generator("zero", {}, make_terminal("const", {}));
        const std::vector<double> p{1.3};
        CHECK(hamiltonian(0.3, seg, 0.5, p, SymMatrix::zero(1), m,
                          u_values({{0.0}}), proj) == 0.0);
    }
    SECTION("bang-bang drift realizes |p|") {
        Model m;
        m.coefficients = make_coefficients("control_drift", {});
        m.generator = make_generator("zero", {}, make_terminal("const", {}));
        const ControlLattice lattice = u_values({{-1.0}, {1.0}});
        for (double pv : {-2.0, 0.5, 3.0}) {
            const std::vector<double> p{pv};
            CHECK(hamiltonian(0.3, seg, 0.0, p, SymMatrix::zero(1), m, lattice, proj) ==
                  std::abs(pv));
        }
    }
    SECTION("pure diffusion realizes A / 2") {
        Model m;
        m.coefficients = make_coefficients("control_drift", {{"sigma0", 1.0}});
        m.generator = make_generator("zero", {}, make_terminal("const", {}));
        SymMatrix a = SymMatrix::zero(1);
        a(0, 0) = -1.6;
        const std::vector<double> p{0.0};
        CHECK(hamiltonian(0.3, seg, 0.0, p, a, m, u_values({{0.0}}), proj) == -0.8);
    }
    SECTION("asymmetric Hessians and z-dependent drivers are rejected") {
        Model m;
        m.coefficients = make_coefficients("control_drift", {{"sigma0", 1.0}});
        m.generator = make_generator("zero", {}, make_terminal("const", {}));
        const LagProjection proj2({0, 1}, 1, 2, 0.1);
        const PathSegment seg2 = PathSegment::constant(0.3, 0.1, 2, 0.7);
        SymMatrix bad = SymMatrix::zero(2);
        bad(0, 1) = 1.0;
        const std::vector<double> p{0.0, 0.0};
        CHECK_THROWS_AS(
            hamiltonian(0.3, seg2, 0.0, p, bad, m, u_values({{0.0}}), proj2),
            ConfigError);
        Model zdep = m;
        zdep.generator.z_dependent = true;
        CHECK_THROWS_AS(hamiltonian(0.3, seg, 0.0, std::vector<double>{0.0},
                                    SymMatrix::zero(1), zdep, u_values({{0.0}}), proj),
                        ConfigError);
    }
    SECTION("H is convex in (p, A) and monotone under U refinement") {
        Model m;
        m.coefficients = make_coefficients("control_drift", {{"sigma0", 0.5}});
        m.generator = make_generator("abs_y", {}, make_terminal("const", {}));
        const ControlLattice coarse = u_values({{-1.0}, {1.0}});
        ControlLattice fine = coarse;
        fine.values.push_back({0.3});
        fine.values.push_back({2.0});
        SequenceRng rng(71);
        for (int trial = 0; trial < 200; ++trial) {
            const double r = rng.uniform(-1.0, 1.0);
            std::vector<double> p1{rng.uniform(-2.0, 2.0)}, p2{rng.uniform(-2.0, 2.0)};
            SymMatrix a1 = SymMatrix::zero(1), a2 = SymMatrix::zero(1);
            a1(0, 0) = rng.uniform(-2.0, 2.0);
            a2(0, 0) = rng.uniform(-2.0, 2.0);
            const double lambda = rng.uniform(0.0, 1.0);
            std::vector<double> pm{lambda * p1[0] + (1.0 - lambda) * p2[0]};
            SymMatrix am = SymMatrix::zero(1);
            am(0, 0) = lambda * a1(0, 0) + (1.0 - lambda) * a2(0, 0);
            const double h1 = hamiltonian(0.3, seg, r, p1, a1, m, coarse, proj);
            const double h2 = hamiltonian(0.3, seg, r, p2, a2, m, coarse, proj);
            const double hm = hamiltonian(0.3, seg, r, pm, am, m, coarse, proj);
            CHECK(hm <= lambda * h1 + (1.0 - lambda) * h2 + 1e-10);
            const double hf = hamiltonian(0.3, seg, r, p1, a1, m, fine, proj);
            CHECK(hf >= h1);
        }
    }
}

TEST_CASE("ellipticity audit sensitivity") {
    const LagProjection proj({0, 2}, 1, 2, 0.1);
    const PathSegment seg = PathSegment::constant(0.3, 0.1, 2, 0.7);
    Model m;
    m.coefficients = make_coefficients("gbm", {{"a", 0.2}, {"sigma0", 0.4}});
    m.generator = make_generator("damped_state", {}, make_terminal("const", {}));
    const ControlLattice lattice = u_values({{0.0}});
    const std::vector<double> p{0.4, -0.2};
    auto h_of_a = [&](const SymMatrix& a) {
        return hamiltonian(0.3, seg, 0.1, p, a, m, lattice, proj);
    };
    CHECK(ellipticity_audit(h_of_a, 2, 100, 17).violations == 0);
    SECTION("equal matrices can never violate the ordering") {
        SequenceRng rng(23);
        for (int i = 0; i < 20; ++i) {
            const SymMatrix x = SymMatrix::random_psd(2, rng);
            CHECK(h_of_a(x) <= h_of_a(x) + 1e-10);
        }
    }
    auto negated = [&](const SymMatrix& a) {
        SymMatrix flip = a;
        for (double& v : flip.a) v = -v;
        return h_of_a(flip);
    };
    CHECK(ellipticity_audit(negated, 2, 100, 17).violations > 0);
}

TEST_CASE("viscosity checks on the polynomial heat fixture") {
    // u(t, x) = x^2 + (T - t) solves u_t + u_xx / 2 = 0 with sigma = 1.
    const double horizon = 1.0;
    Model m;
    m.coefficients = make_coefficients("control_drift", {{"sigma0", 1.0}});
    m.generator = make_generator("zero", {}, make_terminal("const", {}));
    m.generator.phi = [](const PathSegment& seg) {
        return seg.current_scalar() * seg.current_scalar();
    };
    const ControlLattice lattice = u_values({{0.0}});
    const LagProjection proj({0}, 1, 0, 0.1);
    const ProjectedFn u = [horizon](double t, std::span<const double> x) {
        return x[0] * x[0] + (horizon - t);
    };
    TestFunction phi;
    phi.phi = u;
    phi.dphi_dt = [](double, std::span<const double>) { return -1.0; };
    phi.gradient = [](double, std::span<const double> x, std::span<double> g) {
        g[0] = 2.0 * x[0];
    };
    phi.hessian = [](double, std::span<const double>, std::span<double> h) {
        h[0] = 2.0;
    };
    ProbeNeighborhood hood;

    SECTION("phi = u touches on both sides with zero residual") {
        const std::vector<double> coords{0.4};
        for (ViscositySide side : {ViscositySide::Sub, ViscositySide::Super}) {
            const auto check = viscosity_inequality_check(
                u, phi, 0.5, coords, side, m, lattice, proj, hood, 1e-10, horizon);
            CHECK(check.applicable);
            CHECK(check.pass);
            CHECK(std::abs(check.residual) <= 1e-10);
        }
    }
    SECTION("positive curvature only helps the sub-side") {
        TestFunction bump = phi;
        bump.phi = [u](double t, std::span<const double> x) {
            const double dx = x[0] - 0.4;
            const double dt = t - 0.5;
            return u(t, x) + 2.0 * dx * dx + 1.5 * dt * dt;
        };
        bump.dphi_dt = [](double t, std::span<const double>) {
            return -1.0 + 3.0 * (t - 0.5);
        };
        bump.gradient = [](double, std::span<const double> x, std::span<double> g) {
            g[0] = 2.0 * x[0] + 4.0 * (x[0] - 0.4);
        };
        bump.hessian = [](double, std::span<const double>, std::span<double> h) {
            h[0] = 6.0;
        };
        const std::vector<double> coords{0.4};
        const auto check = viscosity_inequality_check(
            u, bump, 0.5, coords, ViscositySide::Sub, m, lattice, proj, hood, 1e-10,
            horizon);
        CHECK(check.applicable);
        CHECK(check.residual >= -1e-10);
        CHECK(check.pass);
    }
    SECTION("a wrong extremum side is reported inapplicable") {
        TestFunction dip = phi;
        dip.phi = [u](double t, std::span<const double> x) {
            const double dx = x[0] - 0.4;
            return u(t, x) - 3.0 * dx * dx;
        };
        dip.gradient = [](double, std::span<const double> x, std::span<double> g) {
            g[0] = 2.0 * x[0] - 6.0 * (x[0] - 0.4);
        };
        dip.hessian = [](double, std::span<const double>, std::span<double> h) {
            h[0] = -4.0;
        };
        const std::vector<double> coords{0.4};
        const auto check = viscosity_inequality_check(
            u, dip, 0.5, coords, ViscositySide::Sub, m, lattice, proj, hood, 1e-10,
            horizon);
        CHECK_FALSE(check.applicable);
        CHECK(check.reason.find("not minimal") != std::string::npos);
    }
    SECTION("a wrong supplied derivative fails the self-audit") {
        TestFunction wrong = phi;
        wrong.gradient = [](double, std::span<const double> x, std::span<double> g) {
            g[0] = 4.0 * x[0];  // double the truth
        };
        const std::vector<double> coords{0.4};
        const auto check = viscosity_inequality_check(
            u, wrong, 0.5, coords, ViscositySide::Sub, m, lattice, proj, hood, 1e-10,
            horizon);
        CHECK_FALSE(check.applicable);
        CHECK(check.reason.find("self-audit") != std::string::npos);
    }
    SECTION("terminal condition check") {
        CHECK(viscosity_terminal_check(u, m, proj, horizon, {{0.0}, {0.5}, {-1.2}},
                                       ViscositySide::Sub, 1e-12));
        CHECK(viscosity_terminal_check(u, m, proj, horizon, {{0.0}, {0.5}, {-1.2}},
                                       ViscositySide::Super, 1e-12));
    }
}

TEST_CASE("stability exercise: a kinked driver under mollification") {
    // u(t) = -exp(-(T - t)) solves u_t + u_xx / 2 + |u| = 0 (u < 0, flat in
    // x). Away from the kink the mollified drivers coincide with |y|, so
    // the same test function passes against H and every audited H_n with a
    // common tolerance.
    const double horizon = 1.0;
    Model m;
    m.coefficients = make_coefficients("control_drift", {{"sigma0", 1.0}});
    m.generator = make_generator("abs_y", {}, make_terminal("const", {{"c", -1.0}}));
    const ControlLattice lattice = u_values({{0.0}});
    const LagProjection proj({0}, 1, 0, 0.1);
    const ProjectedFn u = [horizon](double t, std::span<const double>) {
        return -std::exp(-(horizon - t));
    };
    TestFunction phi;
    phi.phi = u;
    phi.dphi_dt = [horizon](double t, std::span<const double>) {
        return -std::exp(-(horizon - t));
    };
    phi.gradient = [](double, std::span<const double>, std::span<double> g) { g[0] = 0.0; };
    phi.hessian = [](double, std::span<const double>, std::span<double> h) { h[0] = 0.0; };
    ProbeNeighborhood hood;
    const std::vector<double> coords{0.3};
    const double common_tol = 1e-9;

    auto residual_against = [&](const Model& model) {
        const auto check = viscosity_inequality_check(
            u, phi, 0.5, coords, ViscositySide::Sub, model, lattice, proj, hood,
            common_tol, horizon);
        REQUIRE(check.applicable);
        return check.residual;
    };
    CHECK(std::abs(residual_against(m)) <= common_tol);
    for (std::size_t n : {4u, 8u, 16u, 32u}) {
        Model smooth = m;
        smooth.generator = mollify(m.generator, n, MollifierSpec::make(n));
        CHECK(std::abs(residual_against(smooth)) <= common_tol);
    }
}

TEST_CASE("hamiltonian transfer table") {
    const TimeGrid grid = make_grid_no_delay(0.0, 1.0, 0.1);
    const LagProjection proj({0}, 1, 0, grid.step());
    Model m;
    m.coefficients = make_coefficients("control_drift", {{"sigma0", 0.5}});
    const ControlLattice lattice = u_values({{-1.0}, {1.0}});
    SequenceRng rng(5);
    std::vector<HamiltonianProbe> probes;
    for (int i = 0; i < 20; ++i) {
        HamiltonianProbe p;
        p.t = rng.uniform(0.0, 1.0);
        p.segment = PathSegment::constant(p.t, grid.step(), 0, rng.uniform(-1.0, 1.0));
        p.r = rng.uniform(-1.0, 1.0);
        p.p = {rng.uniform(-2.0, 2.0)};
        p.A = SymMatrix::zero(1);
        p.A(0, 0) = rng.uniform(-2.0, 2.0);
        probes.push_back(std::move(p));
    }
    SECTION("linear drivers transfer exactly") {
        m.generator = make_generator("linear_y", {{"mu", 0.7}},
                                     make_terminal("const", {}));
        const auto rows = hamiltonian_convergence_audit(
            m, [&](std::size_t n) { return mollify(m.generator, n, MollifierSpec::make(n)); },
            {2, 8}, probes, lattice, proj);
        for (const auto& row : rows) {
            CHECK(row.transfer_ok);
            CHECK(row.h_error <= 1e-12);
        }
    }
    SECTION("kinked drivers transfer row-wise, singleton U with equality") {
        m.generator = make_generator("abs_y", {}, make_terminal("const", {}));
        const auto rows = hamiltonian_convergence_audit(
            m, [&](std::size_t n) { return mollify(m.generator, n, MollifierSpec::make(n)); },
            {5, 10, 20}, probes, lattice, proj);
        for (const auto& row : rows) CHECK(row.transfer_ok);

        const ControlLattice single = u_values({{0.5}});
        const auto srows = hamiltonian_convergence_audit(
            m, [&](std::size_t n) { return mollify(m.generator, n, MollifierSpec::make(n)); },
            {5, 10}, probes, single, proj);
        for (const auto& row : srows)
            CHECK(row.h_error == Catch::Approx(row.g_error).margin(1e-12));
    }
}
