#include <doctest.h>

#include <cmath>
#include <string>

#include "stubmine/report.hpp"
#include "stubmine/report_json.hpp"

using namespace stubmine;

TEST_CASE("grid points are inclusive of both endpoints")
{
    const auto g = detail::grid_points(0.05, 0.45, 0.05);
    REQUIRE(g.size() == 9);
    CHECK(g.front() == doctest::Approx(0.05));
    CHECK(g.back() == doctest::Approx(0.45));
    const auto h = detail::grid_points(0.0, 1.0, 0.1);
    CHECK(h.size() == 11);
}

TEST_CASE("sweep spec validation")
{
    SweepSpec spec;
    spec.metric = SweepMetric::rho_l; // requires a level
    CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);
    spec.level = StubbornLevel(2);
    spec.alpha_step = -1.0;
    CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);
    spec.alpha_step = 0.05;
    spec.alpha_stop = 0.6; // outside the model domain
    CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);
}

TEST_CASE("sweep output is deterministic and worker-invariant")
{
    SweepSpec spec;
    spec.metric = SweepMetric::l_star;
    spec.alpha_start = 0.05;
    spec.alpha_stop = 0.45;
    spec.alpha_step = 0.1;
    spec.gamma_start = 0.0;
    spec.gamma_stop = 1.0;
    spec.gamma_step = 0.25;
    const std::string a = to_csv(run_sweep(spec));
    const std::string b = to_csv(run_sweep(spec));
    CHECK(a == b);
    SweepSpec par = spec;
    par.workers = 4;
    CHECK(to_csv(run_sweep(par)) == a);
}

TEST_CASE("csv format: header, six decimals, inf literal, LF endings")
{
    SweepSpec spec;
    spec.metric = SweepMetric::l_bar;
    spec.alpha_start = spec.alpha_stop = 0.3;
    spec.alpha_step = 0.1;
    spec.gamma_start = 0.0;
    spec.gamma_stop = 1.0;
    spec.gamma_step = 1.0; // gamma in {0, 1}
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 2);
    const std::string csv = to_csv(rows);
    CHECK(csv == "alpha,gamma,value\n"
                 "0.300000,0.000000,1.000000\n"
                 "0.300000,1.000000,inf\n");
    CHECK(csv.find('\r') == std::string::npos);
}

TEST_CASE("rows round-trip through json exactly")
{
    SweepSpec spec;
    spec.metric = SweepMetric::rho_l;
    spec.level = StubbornLevel(3);
    spec.alpha_start = 0.1;
    spec.alpha_stop = 0.4;
    spec.alpha_step = 0.15;
    spec.gamma_start = 0.0;
    spec.gamma_stop = 1.0;
    spec.gamma_step = 0.5;
    const auto rows = run_sweep(spec);
    const auto back = rows_from_json(to_json_string(rows));
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i] == rows[i]);
    }
    // an unbounded value survives the round trip as well
    SweepSpec inf_spec;
    inf_spec.metric = SweepMetric::l_bar;
    inf_spec.alpha_start = inf_spec.alpha_stop = 0.3;
    inf_spec.gamma_start = inf_spec.gamma_stop = 1.0;
    const auto inf_rows = run_sweep(inf_spec);
    const auto inf_back = rows_from_json(to_json_string(inf_rows));
    REQUIRE(inf_back.size() == 1);
    CHECK(std::isinf(inf_back[0].value));
}

TEST_CASE("break-even sweep: zero region coincides with plain profitability")
{
    for (const auto strategy : {Strategy::stubborn, Strategy::stealth}) {
        SweepSpec spec;
        spec.metric = SweepMetric::r_star;
        spec.strategy = strategy;
        spec.k = 6;
        for (const auto& row : run_sweep(spec)) {
            const ModelParams p(row.alpha, row.gamma);
            const double plain = strategy == Strategy::stubborn
                                     ? revenue_stubborn(p, 7).ratio
                                     : revenue_stealth(p, 7).ratio;
            CHECK((row.value == 0.0) == (plain >= row.alpha));
        }
    }
}

TEST_CASE("optimal-level sweep reproduces the classic threshold at zero influence")
{
    SweepSpec spec;
    spec.metric = SweepMetric::l_star;
    spec.alpha_start = 0.30;
    spec.alpha_stop = 0.36;
    spec.alpha_step = 0.005;
    spec.gamma_start = spec.gamma_stop = 0.0;
    for (const auto& row : run_sweep(spec)) {
        if (row.alpha < 1.0 / 3.0 - 1e-9) {
            CHECK(row.value == 1.0);
        } else if (row.alpha > 1.0 / 3.0 + 1e-3) {
            CHECK(row.value >= 2.0);
        }
    }
}

TEST_CASE("normalized-ratio sweep divides by alpha")
{
    SweepSpec spec;
    spec.metric = SweepMetric::normalized_ratio;
    spec.level = StubbornLevel(7);
    spec.alpha_start = spec.alpha_stop = 0.41;
    spec.gamma_start = spec.gamma_stop = 1.0;
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 1);
    CHECK(std::abs(rows[0].value - 1.639) < 5e-3);
}

TEST_CASE("reference tables: closed-form columns")
{
    // gamma = 0 row: the level-2 column must equal the closed selfish form,
    // which at alpha = 1/3 is exactly 1/3 (the profitability threshold)
    const auto t1 = revenue_table_gamma0();
    REQUIRE(t1.size() == 7);
    CHECK(t1[0].alpha == doctest::Approx(1.0 / 3.0));
    CHECK(t1[0].rho2 == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    const double rho2_ref[] = {0.0, 0.36651, 0.42118, 0.48372, 0.55801, 0.65177, 0.78255};
    const double best_ref[] = {0.33333, 0.36651, 0.42118, 0.48372, 0.55801, 0.66248, 0.80043};
    for (std::size_t i = 1; i < t1.size(); ++i) {
        CHECK(std::abs(t1[i].rho2 - rho2_ref[i]) < 5e-5);
    }
    for (std::size_t i = 0; i < t1.size(); ++i) {
        CHECK(std::abs(t1[i].rho_best - best_ref[i]) < 5e-5);
        CHECK(t1[i].rho_best >= t1[i].rho2 - 1e-12);
    }

    const auto t2 = revenue_table_gamma_grid();
    REQUIRE(t2.size() == 8);
    const double grid_ref[8][5] = {
        {0.1, 0.1, 0.1, 0.1, 0.1},
        {0.15, 0.15, 0.15, 0.15, 0.151},
        {0.2, 0.2, 0.2, 0.2, 0.218},
        {0.25, 0.25, 0.25, 0.261, 0.297},
        {0.3, 0.316, 0.327, 0.342, 0.390},
        {0.386, 0.407, 0.425, 0.453, 0.502},
        {0.502, 0.536, 0.566, 0.594, 0.636},
        {0.686, 0.729, 0.753, 0.772, 0.799},
    };
    for (std::size_t i = 0; i < t2.size(); ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(std::abs(t2[i].rho_best[j] - grid_ref[i][j]) < 5e-4);
        }
    }
}
