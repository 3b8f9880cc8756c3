#include <catch2/catch_amalgamated.hpp>

#include "dsrc/dsrc.hpp"
#include "dsrc/util/quadrature.hpp"

using namespace dsrc;

namespace {

std::vector<ProbePoint> y_lattice(double lo, double hi, std::size_t points) {
    std::vector<ProbePoint> probes;
    for (std::size_t i = 0; i < points; ++i) {
        ProbePoint p;
        p.t = 0.0;
        p.segment = PathSegment::constant(0.0, 0.1, 0, 0.0);
        p.y = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        p.control = {0.0};
        probes.push_back(std::move(p));
    }
    return probes;
}

const std::vector<double> kNoZ;
const std::vector<double> kV{0.0};
const PathSegment kSeg = PathSegment::constant(0.0, 0.1, 0, 0.0);

double eval(const GeneratorSpec& g, double y) {
    return g.g(0.0, kSeg, y, kNoZ, kV);
}

} // namespace

TEST_CASE("mollifier spec") {
    const MollifierSpec spec = MollifierSpec::make(10);
    SECTION("unit mass and compact support") {
        CHECK(std::abs(spec.total_mass() - 1.0) <= 1e-12);
        for (double o : spec.offsets) {
            CHECK(o > 0.0);
            CHECK(o <= 0.1);
        }
        CHECK(spec.density(0.11) == 0.0);
        CHECK(spec.density(-0.2) == 0.0);
        CHECK(spec.density(0.0) > 0.0);
    }
    SECTION("parameters are validated") {
        CHECK_THROWS_AS(MollifierSpec::make(0), ConfigError);
        CHECK_THROWS_AS(MollifierSpec::make(4, 7), ConfigError);
    }
}

TEST_CASE("mollification of the bundled drivers") {
    const GeneratorSpec absy = make_generator("abs_y", {}, make_terminal("const", {}));
    SECTION("linear drivers are reproduced to rounding") {
        const GeneratorSpec lin = make_generator(
            "linear_y", {{"mu", 3.0}}, make_terminal("const", {}));
        const GeneratorSpec lin10 = mollify(lin, 10, MollifierSpec::make(10));
        for (double y : {-1.5, -0.3, 0.0, 0.7, 2.0})
            CHECK(eval(lin10, y) == Catch::Approx(3.0 * y).margin(1e-13));
    }
    SECTION("|y| at the kink equals the first absolute moment of the bump") {
        const GeneratorSpec g10 = mollify(absy, 10, MollifierSpec::make(10));
        const double at_zero = eval(g10, 0.0);
        CHECK(at_zero > 0.0);
        CHECK(at_zero <= 0.1);
        // Independent oracle: Simpson quadrature of |a| rho_n(a) da. The
        // Gauss-Legendre rule sees the kink of |y - a| at y = 0, so its
        // accuracy drops from spectral to ~1e-4 relative there; everywhere
        // else the integrand is smooth. The 1/n bound is unaffected
        // (weights sum to one and offsets stay inside the support).
        const MollifierSpec spec = MollifierSpec::make(10);
        const double oracle = simpson(
            [&](double a) { return std::abs(a) * spec.density(a); }, -0.1, 0.1, 4000);
        CHECK(at_zero == Catch::Approx(oracle).margin(5e-5));
    }
    SECTION("away from the kink the convolution is exact") {
        const GeneratorSpec g10 = mollify(absy, 10, MollifierSpec::make(10));
        for (double y : {-0.8, -0.2, 0.15, 0.9})
            CHECK(eval(g10, y) == Catch::Approx(std::abs(y)).margin(1e-14));
    }
    SECTION("dense-grid sup error obeys the 1/n bound") {
        const auto probes = y_lattice(-1.0, 1.0, 401);
        for (std::size_t n : {5u, 10u, 20u, 40u}) {
            const GeneratorSpec g_n = mollify(absy, n, MollifierSpec::make(n));
            CHECK(sup_probe_error(absy, g_n, probes) <=
                  1.0 / static_cast<double>(n) + 1e-10);
        }
    }
    SECTION("monotonicity is preserved with the same mu") {
        const GeneratorSpec cubic =
            make_generator("cubic_decay", {}, make_terminal("const", {}));
        const GeneratorSpec c8 = mollify(cubic, 8, MollifierSpec::make(8));
        CHECK(c8.monotone_mu == cubic.monotone_mu);
        const TimeGrid grid = make_grid_no_delay(0.0, 1.0, 0.1);
        ProbeGenerator probe(3, 0.0, 1.0, grid.step(), 0, 1, -2.0, 2.0);
        const AuditReport rep =
            audit_generator_monotonicity(c8, probe, 1000, -3.0, 3.0, 0.0, 1.0, 1, 1);
        CHECK(rep.clean());
    }
    SECTION("finite-difference slope of the smoothed kink stays below one") {
        const GeneratorSpec g10 = mollify(absy, 10, MollifierSpec::make(10));
        for (double y = -0.3; y <= 0.3; y += 0.01) {
            const double fd = (eval(g10, y + 1e-6) - eval(g10, y - 1e-6)) / 2e-6;
            CHECK(std::abs(fd) <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("truncation of the zero slice") {
    SECTION("inactive truncation passes values through untouched") {
        const GeneratorSpec g = make_generator(
            "damped_state", {{"mu", -1.0}, {"k", 0.5}}, make_terminal("const", {}));
        const GeneratorSpec gm = truncate(g, 10.0);
        PathSegment seg = PathSegment::constant(0.3, 0.1, 0, 0.4);
        for (double y : {-2.0, 0.0, 1.3})
            CHECK(gm.g(0.3, seg, y, kNoZ, kV) == g.g(0.3, seg, y, kNoZ, kV));
    }
    SECTION("affine driver with a large offset is clamped at m") {
        const GeneratorSpec g = make_generator(
            "linear_y", {{"mu", 1.0}, {"c", 3.0}}, make_terminal("const", {}));
        const GeneratorSpec gm = truncate(g, 1.0);  // |g(0)| = 3 = 3m
        CHECK(eval(gm, 0.0) == 1.0);
        for (double y : {-1.0, 0.5, 2.0})
            CHECK(eval(gm, y) == Catch::Approx(y + 1.0).margin(1e-12));
    }
    SECTION("the y-increment is untouched by truncation") {
        const GeneratorSpec g = make_generator(
            "linear_y", {{"mu", 1.0}, {"c", -7.0}}, make_terminal("const", {}));
        const GeneratorSpec gm = truncate(g, 2.0);
        for (double y : {-3.0, -0.5, 0.1, 4.0}) {
            const double inc_g = eval(g, y) - eval(g, 0.0);
            const double inc_gm = eval(gm, y) - eval(gm, 0.0);
            CHECK(inc_gm == Catch::Approx(inc_g).margin(1e-12));
        }
    }
    SECTION("monotonicity audit still passes after truncation") {
        const GeneratorSpec g = make_generator(
            "cubic_state", {{"k", 0.5}, {"c", 5.0}}, make_terminal("const", {}));
        const GeneratorSpec gm = truncate(g, 2.0);
        CHECK(gm.monotone_mu == g.monotone_mu);
        const TimeGrid grid = make_grid(0.0, 1.0, 0.2, 2);
        ProbeGenerator probe(5, 0.0, 1.0, grid.step(), grid.lag_steps(), 1, -2.0, 2.0);
        const AuditReport rep =
            audit_generator_monotonicity(gm, probe, 1000, -3.0, 3.0, 0.0, 1.0, 1, 1);
        CHECK(rep.clean());
    }
}

TEST_CASE("uniform convergence audit") {
    const GeneratorSpec absy = make_generator("abs_y", {}, make_terminal("const", {}));
    const auto probes = y_lattice(-1.0, 1.0, 201);
    auto family = [&](std::size_t n) {
        return mollify(absy, n, MollifierSpec::make(n));
    };
    SECTION("linear drivers converge at the first candidate") {
        const GeneratorSpec lin = make_generator(
            "linear_y", {{"mu", 1.0}}, make_terminal("const", {}));
        auto lin_family = [&](std::size_t n) {
            return mollify(lin, n, MollifierSpec::make(n));
        };
        const auto result = uniform_convergence_audit(lin, lin_family, probes, 1e-8);
        CHECK(result.converged);
        CHECK(result.achieved_n == 1);
    }
    SECTION("slack tolerance also stops at n = 1") {
        const auto result = uniform_convergence_audit(absy, family, probes, 10.0);
        CHECK(result.converged);
        CHECK(result.achieved_n == 1);
    }
    SECTION("the kink error is exactly the bump's first absolute moment") {
        // Oracle: the sup error at level n is c*/n with c* from independent
        // Simpson quadrature; the audit must stop at the first dyadic n
        // with c*/n <= eps.
        const double eps = 0.05;
        const MollifierSpec unit = MollifierSpec::make(1);
        const double c_star = simpson(
            [&](double a) { return std::abs(a) * unit.density(a); }, -1.0, 1.0, 8000);
        std::size_t expected = 1;
        while (c_star / static_cast<double>(expected) > eps) expected *= 2;
        const auto result = uniform_convergence_audit(absy, family, probes, eps);
        CHECK(result.converged);
        CHECK(result.achieved_n == expected);
        CHECK(result.achieved_error <= eps);
        CHECK(result.achieved_error <= 1.0 / static_cast<double>(result.achieved_n));
    }
    SECTION("an exhausted schedule is a reported failure, not a crash") {
        const auto result = uniform_convergence_audit(absy, family, probes, 1e-9, 4);
        CHECK_FALSE(result.converged);
        CHECK(result.table.size() == 3);  // n = 1, 2, 4
        CHECK(std::abs(result.worst_probe_y) <= 0.26);  // the kink neighborhood
    }
}
