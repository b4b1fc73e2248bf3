#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "stubmine/analytic.hpp"
#include "stubmine/sim.hpp"

using namespace stubmine;

namespace {

// Scripted draw sequence for deterministic cycle traces. Arrival draws read
// below-alpha values as adversarial; switch draws read below-gamma values as
// a prefix switch.
struct ScriptedRng {
    std::vector<double> draws;
    std::size_t next = 0;

    double uniform()
    {
        REQUIRE(next < draws.size());
        return draws[next++];
    }
};

constexpr double ADV = 0.0;  // below any alpha in use
constexpr double HON = 0.99; // above any alpha, above any gamma (no switch)
constexpr double SWT = 0.0;  // below any positive gamma: switch happens

} // namespace

TEST_CASE("stubborn cycle: first honest arrival ends the cycle immediately")
{
    const ModelParams p(0.35, 0.5);
    ScriptedRng rng{{HON}};
    const auto oc = run_cycle_stubborn(p, 4, 6, rng);
    CHECK(oc.end == CycleEndKind::adopt);
    CHECK(oc.adversary_blocks_to_offset == 0);
    CHECK(oc.honest_blocks_to_offset == 1);
    CHECK(oc.event == CycleEvent::service);
    CHECK(oc.replaced_confirmed_blocks == 0);
}

TEST_CASE("stubborn cycle: forced adversarial run overrides with the full private chain")
{
    const ModelParams p(0.45, 0.5);
    // three private blocks, then two honest arrivals shrink the lead to one
    ScriptedRng rng{{ADV, ADV, ADV, HON, HON, HON}};
    // draws: A A A, honest (no pending match -> no switch draw), honest
    const auto oc = run_cycle_stubborn(p, 3, 6, rng);
    CHECK(oc.end == CycleEndKind::override_release);
    CHECK(oc.adversary_blocks_to_offset == 3);
    CHECK(oc.honest_blocks_to_offset == 0);
    CHECK(oc.final_state.h_len == 2);
    // no honest block was ever 6 deep: the height-1 honest block was simply
    // never confirmed
    CHECK(oc.event == CycleEvent::move_funds);
    CHECK(rng.next == 5); // the sixth draw is never consumed
}

TEST_CASE("stubborn cycle: extension blocks join the release")
{
    const ModelParams p(0.45, 0.5);
    // reach the level, keep mining one extra block, then honest catches up
    ScriptedRng rng{{ADV, ADV, ADV, ADV, HON, HON, HON}};
    const auto oc = run_cycle_stubborn(p, 3, 6, rng);
    CHECK(oc.end == CycleEndKind::override_release);
    CHECK(oc.adversary_blocks_to_offset == 4); // level + 1 extension
    CHECK(oc.honest_blocks_to_offset == 0);
}

TEST_CASE("stubborn cycle: classic level-2 match outcomes")
{
    const ModelParams p(0.4, 0.7);
    {
        // tie at one, adversary mines next: override with two blocks
        ScriptedRng rng{{ADV, HON, ADV}};
        const auto oc = run_cycle_stubborn(p, 2, 6, rng);
        CHECK(oc.end == CycleEndKind::override_release);
        CHECK(oc.adversary_blocks_to_offset == 2);
        CHECK(oc.honest_blocks_to_offset == 0);
    }
    {
        // tie at one, honest block rides the released branch: adopt (1, 1).
        // Draw order at the second honest block is arrival first, then the
        // pending-match switch draw.
        ScriptedRng rng{{ADV, HON, HON, SWT}};
        const auto oc = run_cycle_stubborn(p, 2, 6, rng);
        CHECK(oc.end == CycleEndKind::adopt);
        CHECK(oc.adversary_blocks_to_offset == 1);
        CHECK(oc.honest_blocks_to_offset == 1);
        CHECK(oc.event == CycleEvent::move_funds); // height-1 honest block orphaned unconfirmed
    }
    {
        // tie at one, honest block stays on the honest branch: adopt (0, 2)
        ScriptedRng rng{{ADV, HON, HON, 0.99 /*no switch*/}};
        const auto oc = run_cycle_stubborn(p, 2, 6, rng);
        CHECK(oc.end == CycleEndKind::adopt);
        CHECK(oc.adversary_blocks_to_offset == 0);
        CHECK(oc.honest_blocks_to_offset == 2);
        CHECK(oc.event == CycleEvent::service);
    }
}

TEST_CASE("stubborn cycle: double spend requires a confirmed block to fall")
{
    const ModelParams p(0.45, 0.0);
    const int k = 2;
    // private chain reaches 3 with no honest block, then two honest arrivals
    // shrink the lead: the public chain reaches k = 2 with a clean prefix, so
    // its height-1 block confirms and is then replaced by the release
    ScriptedRng rng{{ADV, ADV, ADV, HON, HON}};
    const auto oc = run_cycle_stubborn(p, 3, k, rng);
    CHECK(oc.end == CycleEndKind::override_release);
    CHECK(oc.event == CycleEvent::double_spending);
    // only height 1 is 2-deep in a final public chain of length 2:
    // replaced = h - k + 1 = 1
    CHECK(oc.replaced_confirmed_blocks == 1);
}

TEST_CASE("stealth cycle: level 2 equals the selfish machine on plain races")
{
    const ModelParams p(0.4, 0.7);
    {
        // match at the (1, 1) tie, next block adversarial: release of 2
        ScriptedRng rng{{ADV, HON, ADV}};
        const auto oc = run_cycle_stealth(p, 2, 6, rng);
        CHECK(oc.end == CycleEndKind::override_release);
        CHECK(oc.adversary_blocks_to_offset == 2);
        CHECK(oc.honest_blocks_to_offset == 0);
    }
    {
        // honest block lands on the released branch: offset takes (1, 1)
        ScriptedRng rng{{ADV, HON, 0.4 + 0.7 * 0.6 - 0.01}};
        const auto oc = run_cycle_stealth(p, 2, 6, rng);
        CHECK(oc.end == CycleEndKind::adopt);
        CHECK(oc.adversary_blocks_to_offset == 1);
        CHECK(oc.honest_blocks_to_offset == 1);
    }
    {
        // honest chain prevails: adopt (0, 2)
        ScriptedRng rng{{ADV, HON, 0.95}};
        const auto oc = run_cycle_stealth(p, 2, 6, rng);
        CHECK(oc.end == CycleEndKind::adopt);
        CHECK(oc.adversary_blocks_to_offset == 0);
        CHECK(oc.honest_blocks_to_offset == 2);
    }
}

TEST_CASE("stealth cycle events: move-funds never occurs at level k + 1")
{
    const ModelParams p(0.41, 0.8);
    const int k = 3;
    SplitMix64 rng(99u);
    for (int i = 0; i < 200000; ++i) {
        const auto oc = run_cycle_stealth(p, k + 1, k, rng);
        CHECK(oc.event != CycleEvent::move_funds);
        CHECK(oc.event != CycleEvent::not_applicable);
    }
}

TEST_CASE("cycle accounting invariants hold on random streams")
{
    const ModelParams p(0.42, 0.6);
    SplitMix64 rng(1234u);
    for (int i = 0; i < 200000; ++i) {
        const auto oc = run_cycle_stubborn(p, 4, 3, rng);
        if (oc.end == CycleEndKind::override_release) {
            CHECK(oc.adversary_blocks_to_offset >= 4);
            CHECK(oc.honest_blocks_to_offset == 0);
        } else {
            CHECK(oc.adversary_blocks_to_offset == oc.final_state.common_prefix);
            CHECK(oc.adversary_blocks_to_offset + oc.honest_blocks_to_offset ==
                  oc.final_state.h_len);
        }
        CHECK(oc.final_state.common_prefix <=
              std::min(oc.final_state.a_len, oc.final_state.h_len));
    }
}

TEST_CASE("estimator: single scripted cycle")
{
    // cycles = 1 with a first honest draw gives the ratio estimate 0 / 1
    std::uint64_t seed = 0;
    for (;; ++seed) { // find a seed whose first draw is honest
        SplitMix64 probe = chunk_stream(seed, 0);
        if (probe.uniform() >= 0.35) break;
    }
    const SimConfig cfg{ModelParams(0.35, 0.0), Strategy::stubborn, StubbornLevel(2), 6, 1,
                        seed};
    const auto est = estimate_revenue(cfg);
    CHECK(est.mean == 0.0);
    CHECK(est.cycles == 1);
}

TEST_CASE("estimator validates the combined-reward level")
{
    SimConfig cfg{ModelParams(0.3, 0.2), Strategy::stubborn, StubbornLevel(3), 6, 10, 1};
    CHECK_THROWS_AS(estimate_combined(cfg, 5.0), std::invalid_argument);
    SimConfig ok = cfg;
    ok.level = StubbornLevel(7);
    CHECK_THROWS_AS(estimate_combined(ok, -1.0), std::invalid_argument);
}

TEST_CASE("cycle domain checks")
{
    const ModelParams p(0.3, 0.2);
    SplitMix64 rng(1u);
    CHECK_THROWS_AS(run_cycle_stubborn(p, 2, 0, rng), std::domain_error);
    CHECK_THROWS_AS(run_cycle_stealth(p, 2, 0, rng), std::domain_error);
    // honest-equivalent level 1: an adversarial first draw releases at once
    ScriptedRng script{{ADV}};
    const auto oc = run_cycle_stubborn(p, 1, 6, script);
    CHECK(oc.end == CycleEndKind::override_release);
    CHECK(oc.adversary_blocks_to_offset == 1);
    CHECK(oc.event == CycleEvent::not_applicable); // no honest block exists
}

TEST_CASE("revenue estimates agree with the closed forms")
{
    // coarse grid, both strategies, several levels; 10^5 cycles keeps the
    // whole case under a few seconds while 4 standard errors still binds
    const double alphas[] = {0.15, 0.3, 0.42};
    const double gammas[] = {0.0, 0.5, 1.0};
    const long long levels[] = {1, 2, 3, 5, 8};
    std::uint64_t seed = 1000;
    for (const double a : alphas) {
        for (const double g : gammas) {
            const ModelParams p(a, g);
            for (const long long level : levels) {
                for (const auto strategy : {Strategy::stubborn, Strategy::stealth}) {
                    const SimConfig cfg{p, strategy, StubbornLevel(level), 6, 100000, ++seed};
                    const auto est = estimate_revenue(cfg);
                    const double want = strategy == Strategy::stubborn
                                            ? revenue_stubborn(p, level).ratio
                                            : revenue_stealth(p, level).ratio;
                    const double tol = 4.0 * std::max(est.std_error, 1e-9);
                    INFO("a=", a, " g=", g, " L=", level, " strat=", to_string(strategy),
                         " est=", est.mean, " want=", want);
                    CHECK(std::abs(est.mean - want) < tol);
                }
            }
        }
    }
}

TEST_CASE("reference revenue at (0.35, 0, L=2) over ten million cycles")
{
    const SimConfig cfg{ModelParams(0.35, 0.0), Strategy::stubborn, StubbornLevel(2), 6,
                        10'000'000, 42};
    const auto est = estimate_revenue(cfg);
    CHECK(std::abs(est.mean - 0.36651) < 3.0 * est.std_error);
    CHECK(est.std_error < 3e-4);
}

TEST_CASE("event frequencies agree with the closed forms")
{
    std::uint64_t seed = 7000;
    for (const double a : {0.3, 0.41}) {
        for (const double g : {0.0, 0.5, 1.0}) {
            const ModelParams p(a, g);
            for (const int k : {1, 3, 6}) {
                for (const auto strategy : {Strategy::stubborn, Strategy::stealth}) {
                    const SimConfig cfg{p, strategy, StubbornLevel(k + 1), k, 200000, ++seed};
                    const auto est = estimate_events(cfg);
                    const EventProbs want = strategy == Strategy::stubborn
                                                ? double_spend_probs_stubborn(p, k)
                                                : double_spend_probs_stealth(p, k);
                    const auto close = [&](const SimEstimate& e, double w) {
                        return std::abs(e.mean - w) < 4.0 * std::max(e.std_error, 1e-9) + 1e-9;
                    };
                    INFO("a=", a, " g=", g, " k=", k, " strat=", to_string(strategy));
                    CHECK(close(est.double_spending, want.double_spending));
                    CHECK(close(est.move_funds, want.move_funds));
                    CHECK(close(est.service, want.service));
                }
            }
        }
    }
}

TEST_CASE("stealth double-spend frequency at the cited corner")
{
    const SimConfig cfg{ModelParams(0.41, 1.0), Strategy::stealth, StubbornLevel(7), 6,
                        1'000'000, 31337};
    const auto est = estimate_events(cfg);
    CHECK(std::abs(est.double_spending.mean - 0.108) <
          4.0 * est.double_spending.std_error + 1e-3);
}

TEST_CASE("combined rewards agree with the affine closed form")
{
    std::uint64_t seed = 9000;
    for (const double a : {0.3, 0.41}) {
        for (const double g : {0.0, 0.2, 0.5}) {
            const ModelParams p(a, g);
            for (const auto strategy : {Strategy::stubborn, Strategy::stealth}) {
                const SimConfig cfg{p, strategy, StubbornLevel(7), 6, 400000, ++seed};
                const auto tallies = run_cycles(cfg);
                for (const double reward : {0.0, 5.0}) {
                    const auto est = detail::ratio_estimate(tallies, reward, cfg.seed);
                    const double want =
                        strategy == Strategy::stubborn
                            ? combined_revenue_stubborn(p, {6, reward})
                            : combined_revenue_stealth(p, {6, reward});
                    INFO("a=", a, " g=", g, " strat=", to_string(strategy), " R=", reward,
                         " est=", est.mean, " want=", want);
                    CHECK(std::abs(est.mean - want) < 4.0 * std::max(est.std_error, 1e-9));
                }
            }
        }
    }
}

TEST_CASE("unbounded level simulates the equal-fork strategy")
{
    const ModelParams p(0.35, 0.6);
    const SimConfig cfg{p, Strategy::stubborn, StubbornLevel::infinite(), 6, 200000, 555};
    const auto est = estimate_revenue(cfg);
    const double want = revenue_stubborn(p, StubbornLevel::infinite()).ratio;
    CHECK(std::abs(est.mean - want) < 4.0 * std::max(est.std_error, 1e-9));
    const auto tallies = run_cycles(cfg);
    CHECK(tallies.truncated == 0);
}

TEST_CASE("same seed and cycle count give identical tallies for any worker count")
{
    const ModelParams p(0.38, 0.45);
    SimConfig one{p, Strategy::stubborn, StubbornLevel(4), 6, 200001, 77, 1};
    SimConfig eight = one;
    eight.workers = 8;
    const auto t1 = run_cycles(one);
    const auto t8 = run_cycles(eight);
    CHECK(t1 == t8);
    CHECK(t1.cycles == 200001);

    SimConfig stealth_one{p, Strategy::stealth, StubbornLevel(4), 3, 100000, 123, 1};
    SimConfig stealth_six = stealth_one;
    stealth_six.workers = 6;
    CHECK(run_cycles(stealth_one) == run_cycles(stealth_six));
}

TEST_CASE("truncation guard fires and is reported")
{
    const ModelParams p(0.49, 0.5);
    SimConfig cfg{p, Strategy::stubborn, StubbornLevel::infinite(), 6, 2000, 9, 1,
                  /*max_arrivals=*/50};
    const auto tallies = run_cycles(cfg);
    CHECK(tallies.truncated > 0);
}
