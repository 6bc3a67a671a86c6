#include <doctest.h>

#include <cmath>
#include <vector>

#include "mlsm/driver.hpp"

using namespace mlsm;

namespace {

ProblemSpec slab(double sigma_t, double sigma_s, double q, double width, std::size_t cells)
{
    ProblemSpec p;
    p.name = "slab";
    p.groups = 1;
    p.sigma_t = {sigma_t};
    p.sigma_s = {{sigma_s}};
    p.source = {q};
    p.width = width;
    p.cells = cells;
    p.quad_half_order = 4;
    return p;
}

IterationConfig config(Method m, std::size_t k = 1, std::size_t s = 1)
{
    IterationConfig c;
    c.method = m;
    c.k_max = k;
    c.s_max = s;
    return c;
}

}  // namespace

TEST_CASE("low-order solve count")
{
    CHECK(lo_solve_count(config(Method::MLSM, 1, 1)) == 2);
    CHECK(lo_solve_count(config(Method::MLSM, 2, 4)) == 10);
    CHECK(lo_solve_count(config(Method::MLSM, 5, 1)) == 10);
}

TEST_CASE("convergence measure")
{
    const Mesh m{1.0, 4};
    CHECK(convergence_measure(LDField(m, 1.0), LDField(m, 1.0)) == 0.0);
    CHECK(convergence_measure(LDField(m, 2.0), LDField(m, 1.0)) == 0.5);
    CHECK(convergence_measure(LDField(m, 2.0), LDField(m, 1.0), NormKind::absolute) == 1.0);
    CHECK(convergence_measure(LDField(m), LDField(m, 0.25)) == 0.25);
    LDField a(m, 1.0);
    a.slope = {5.0, 5.0, 5.0, 5.0};
    CHECK(convergence_measure(a, LDField(m, 1.0)) == 0.0);
    std::vector<double> ratios;
    double prev = 0.0;
    for (int l = 1; l < 12; ++l) {
        const double cur = convergence_measure(LDField(m, 1.0 - std::pow(0.2, l)),
                                               LDField(m, 1.0 - std::pow(0.2, l - 1)));
        if (l > 1) {
            ratios.push_back(cur / prev);
        }
        prev = cur;
    }
    CHECK(ratios.back() == doctest::Approx(0.2).epsilon(1e-6));
    CHECK_THROWS_AS((void)convergence_measure(LDField(m), LDField(Mesh{1.0, 5})), std::invalid_argument);
}

TEST_CASE("spectral radius estimate")
{
    std::vector<double> geo;
    for (int l = 0; l < 10; ++l) {
        geo.push_back(std::pow(0.2, l));
    }
    const SpectralEstimate e = estimate_spectral_radius(geo);
    CHECK(e.value == doctest::Approx(0.2).epsilon(1e-12));
    CHECK_FALSE(e.irregular);
    CHECK(e.available);

    const std::vector<double> flat(6, 3.0);
    CHECK(estimate_spectral_radius(flat).value == doctest::Approx(1.0));

    std::vector<double> alt{1.0};
    for (int l = 1; l < 10; ++l) {
        alt.push_back(alt.back() * (l % 2 ? 0.1 : 0.4));
    }
    const SpectralEstimate a = estimate_spectral_radius(alt);
    CHECK(a.irregular);
    CHECK(a.value == doctest::Approx(std::exp((3.0 * std::log(0.1) + 2.0 * std::log(0.4)) / 5.0)));

    const std::vector<double> four{1.0, 0.5, 0.25, 0.125};
    CHECK(estimate_spectral_radius(four).value == doctest::Approx(0.5));
    CHECK_THROWS_AS((void)estimate_spectral_radius(std::vector<double>{1.0, 0.5, 0.25}), std::invalid_argument);
    CHECK_THROWS_AS((void)estimate_spectral_radius(std::vector<double>{1.0, 0.5, 0.0, 0.1}),
                    std::invalid_argument);
}

TEST_CASE("infinite-medium source iteration radius")
{
    const InfiniteMediumRho one = si_infinite_medium_rho(slab(2.0, 1.3, 1.0, 1.0, 1));
    CHECK(one.rho == doctest::Approx(0.65).epsilon(1e-12));
    CHECK(one.power_converged);
    const InfiniteMediumRho t1 = si_infinite_medium_rho(builtin_problem("test1"));
    CHECK(std::abs(t1.rho - 0.96258) < 1e-4);
    const InfiniteMediumRho t2 = si_infinite_medium_rho(builtin_problem("test2"));
    CHECK(std::abs(t2.rho - 0.98617) < 1e-4);
    const InfiniteMediumRho none = si_infinite_medium_rho(slab(1.0, 0.0, 1.0, 1.0, 1));
    CHECK(none.rho == 0.0);
}

TEST_CASE("config validation and method dispatch")
{
    IterationConfig c = config(Method::MLSM);
    c.epsilon = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = config(Method::MLSM, 0, 1);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = config(Method::SI, 0, 0);
    CHECK_NOTHROW(c.validate());
    const ProblemSpec p = slab(1.0, 0.5, 1.0, 4.0, 8);
    CHECK_THROWS_AS((void)run_mlsm(p, config(Method::SI)), std::invalid_argument);
    CHECK_THROWS_AS((void)run_mlsm_aa1(p, config(Method::MLSM)), std::invalid_argument);
    CHECK_THROWS_AS((void)run_source_iteration(p, config(Method::MLSM)), std::invalid_argument);
    CHECK(parse_method("mlsm-aa1") == Method::MLSM_AA1);
    CHECK_THROWS_AS((void)parse_method("MLSM"), std::invalid_argument);
    CHECK(to_string(RunStatus::max_outer) == "max_outer");
}

TEST_CASE("source iteration on a thick single-group slab")
{
    const RunReport r = run_source_iteration(slab(1.0, 0.5, 1.0, 200.0, 200), config(Method::SI));
    CHECK(r.status == RunStatus::converged);
    REQUIRE(r.rho.available);
    CHECK(std::abs(r.rho.value - 0.5) < 0.05);
    CHECK(r.M_lo == 0);
}

TEST_CASE("source iteration without a source")
{
    const RunReport r = run_source_iteration(slab(1.0, 0.9, 0.0, 10.0, 20), config(Method::SI));
    CHECK(r.status == RunStatus::converged);
    CHECK(r.N_t <= 2);
    CHECK(r.grey_phi.avg[5] == 0.0);
}

TEST_CASE("source iteration hits the outer cap on test1")
{
    IterationConfig c = config(Method::SI);
    c.max_outer = 50;
    const RunReport r = run_source_iteration(builtin_problem("test1"), c);
    CHECK(r.status == RunStatus::max_outer);
    CHECK(r.N_t == 50);
    CHECK(r.residual_history.size() == 50);
}

TEST_CASE("multilevel runs on a single group and count their solves")
{
    const ProblemSpec p = slab(1.0, 0.8, 1.0, 10.0, 20);
    for (Method m : {Method::MLSM, Method::MLSM_AA1}) {
        IterationConfig c = config(m, 2, 3);
        const RunReport r = run(p, c);
        CAPTURE(to_string(m));
        CHECK(r.status == RunStatus::converged);
        CHECK(r.M_lo == 8);
        CHECK(r.residual_history.size() == r.N_t);
        CHECK(r.counters.lo_solves.size() == r.N_t);
        for (std::size_t n : r.counters.lo_solves) {
            CHECK(n == 8);
        }
        CHECK(r.counters.sweeps == r.N_t);
        CHECK(r.counters.grey_solves == 2 * (r.N_t + 1));
        CHECK(r.counters.group_passes == 6 * (r.N_t + 1));
        CHECK(r.grey_balance < 1e-10);
    }
}

TEST_CASE("outer cap applies to multilevel runs")
{
    IterationConfig c = config(Method::MLSM);
    c.max_outer = 3;
    const RunReport r = run_mlsm(builtin_problem("test2"), c);
    CHECK(r.status == RunStatus::max_outer);
    CHECK(r.N_t == 3);
    CHECK_FALSE(r.rho.available);
}
