// stubmine: revenue, risk, and optimal-depth calculator for block-withholding
// attacks on longest-chain proof-of-work, with a seeded Monte Carlo
// cross-check. Subcommands: revenue, optimal, doublespend, sweep, simulate,
// tables.
//
// Exit codes: 0 success, 2 domain error, 3 cap or truncation diagnostics.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stubmine/analytic.hpp"
#include "stubmine/optimize.hpp"
#include "stubmine/report.hpp"
#include "stubmine/report_json.hpp"
#include "stubmine/sim.hpp"

using namespace stubmine;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 2;
constexpr int kExitCap = 3;

// Accepts a plain decimal or an exact rational like "1/3".
double parse_alpha(const std::string& text)
{
    const auto slash = text.find('/');
    if (slash == std::string::npos) return std::stod(text);
    const double num = std::stod(text.substr(0, slash));
    const double den = std::stod(text.substr(slash + 1));
    if (den == 0.0) throw std::domain_error("alpha rational has a zero denominator");
    return num / den;
}

StubbornLevel parse_level(const std::string& text)
{
    if (text == "inf" || text == "INF" || text == "infinity") return StubbornLevel::infinite();
    return StubbornLevel(std::stoll(text));
}

Strategy parse_strategy(const std::string& text)
{
    if (text == "stubborn") return Strategy::stubborn;
    if (text == "stealth") return Strategy::stealth;
    throw std::domain_error("strategy must be 'stubborn' or 'stealth', got '" + text + "'");
}

std::string fmt(double v)
{
    if (std::isinf(v)) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

json level_json(StubbornLevel level)
{
    if (level.is_infinite()) return "inf";
    return level.value();
}

struct CommonArgs {
    std::string alpha_text = "0.3";
    double gamma = 0.0;
    std::string strategy_text = "stubborn";

    ModelParams params() const { return ModelParams(parse_alpha(alpha_text), gamma); }
    Strategy strategy() const { return parse_strategy(strategy_text); }
};

void add_common(CLI::App* cmd, CommonArgs& args)
{
    cmd->add_option("--alpha", args.alpha_text,
                    "adversary hashrate share in (0, 0.5); accepts rationals like 1/3")
        ->required();
    cmd->add_option("--gamma", args.gamma, "network influence in [0, 1]")->required();
    cmd->add_option("--strategy", args.strategy_text, "stubborn | stealth")
        ->check(CLI::IsMember({"stubborn", "stealth"}));
}

int cmd_revenue(const CommonArgs& common, const std::string& level_text, bool as_json)
{
    const ModelParams p = common.params();
    const StubbornLevel level = parse_level(level_text);
    const RevenueReport r = common.strategy() == Strategy::stubborn
                                ? revenue_stubborn(p, level)
                                : revenue_stealth(p, level);
    if (as_json) {
        json out;
        out["alpha"] = p.alpha;
        out["gamma"] = p.gamma;
        out["strategy"] = to_string(common.strategy());
        out["level"] = level_json(level);
        out["ratio"] = r.ratio;
        out["normalized_ratio"] = r.ratio / p.alpha;
        out["successful_blocks"] = r.successful_blocks;
        out["unsuccessful_adversarial_blocks"] = r.unsuccessful_adversarial_blocks;
        out["total_unsuccessful_blocks"] = r.total_unsuccessful_blocks;
        std::printf("%s\n", out.dump(2).c_str());
        return kExitOk;
    }
    std::printf("alpha                            %s\n", fmt(p.alpha).c_str());
    std::printf("gamma                            %s\n", fmt(p.gamma).c_str());
    std::printf("strategy                         %s\n", to_string(common.strategy()));
    std::printf("level                            %s\n", level.str().c_str());
    std::printf("ratio                            %s\n", fmt(r.ratio).c_str());
    std::printf("normalized_ratio                 %s\n", fmt(r.ratio / p.alpha).c_str());
    std::printf("successful_blocks                %s\n", fmt(r.successful_blocks).c_str());
    std::printf("unsuccessful_adversarial_blocks  %s\n",
                fmt(r.unsuccessful_adversarial_blocks).c_str());
    std::printf("total_unsuccessful_blocks        %s\n",
                fmt(r.total_unsuccessful_blocks).c_str());
    return kExitOk;
}

int cmd_optimal(const CommonArgs& common, long long cap, bool as_json)
{
    const ModelParams p = common.params();
    const bool stubborn = common.strategy() == Strategy::stubborn;
    const OptimizerResult best = stubborn ? optimal_l(p, cap) : optimal_s(p, cap);
    const StubbornLevel bar = stubborn ? max_profitable_l(p, cap) : max_profitable_s(p, cap);
    if (as_json) {
        json out;
        out["alpha"] = p.alpha;
        out["gamma"] = p.gamma;
        out["strategy"] = to_string(common.strategy());
        out["best_level"] = level_json(best.best_level);
        out["best_ratio"] = best.best_ratio;
        out["normalized_ratio"] = best.best_ratio / p.alpha;
        out["method"] = to_string(best.method);
        out["iterations"] = best.iterations;
        out["max_profitable_level"] = level_json(bar);
        std::printf("%s\n", out.dump(2).c_str());
        return kExitOk;
    }
    std::printf("alpha                 %s\n", fmt(p.alpha).c_str());
    std::printf("gamma                 %s\n", fmt(p.gamma).c_str());
    std::printf("strategy              %s\n", to_string(common.strategy()));
    std::printf("best_level            %s\n", best.best_level.str().c_str());
    std::printf("best_ratio            %s\n", fmt(best.best_ratio).c_str());
    std::printf("normalized_ratio      %s\n", fmt(best.best_ratio / p.alpha).c_str());
    std::printf("method                %s\n", to_string(best.method));
    std::printf("iterations            %d\n", best.iterations);
    std::printf("max_profitable_level  %s\n", bar.str().c_str());
    return kExitOk;
}

int cmd_doublespend(const CommonArgs& common, int k, bool has_reward, double reward,
                    bool has_vf, double service_value, double fee, bool as_json)
{
    const ModelParams p = common.params();
    const Strategy strategy = common.strategy();
    const EventProbs ev = strategy == Strategy::stubborn ? double_spend_probs_stubborn(p, k)
                                                         : double_spend_probs_stealth(p, k);
    json out;
    out["alpha"] = p.alpha;
    out["gamma"] = p.gamma;
    out["strategy"] = to_string(strategy);
    out["k"] = k;
    out["double_spending"] = ev.double_spending;
    out["move_funds"] = ev.move_funds;
    out["service"] = ev.service;
    if (!as_json) {
        std::printf("alpha            %s\n", fmt(p.alpha).c_str());
        std::printf("gamma            %s\n", fmt(p.gamma).c_str());
        std::printf("strategy         %s\n", to_string(strategy));
        std::printf("k                %d\n", k);
        std::printf("double_spending  %s\n", fmt(ev.double_spending).c_str());
        std::printf("move_funds       %s\n", fmt(ev.move_funds).c_str());
        std::printf("service          %s\n", fmt(ev.service).c_str());
    }
    if (has_reward) {
        const CombinedRevenueParams cfg(k, reward);
        const double combined = strategy == Strategy::stubborn
                                    ? combined_revenue_stubborn(p, cfg)
                                    : combined_revenue_stealth(p, cfg);
        const double rstar = breakeven_reward(p, k, strategy);
        out["reward"] = reward;
        out["combined_ratio"] = combined;
        out["breakeven_reward"] = std::isinf(rstar) ? json("inf") : json(rstar);
        if (!as_json) {
            std::printf("reward           %s\n", fmt(reward).c_str());
            std::printf("combined_ratio   %s\n", fmt(combined).c_str());
            std::printf("breakeven_reward %s\n", fmt(rstar).c_str());
        }
    }
    if (has_vf) {
        const bool profitable = service_profitability(p, k, service_value, fee, strategy);
        out["service_value"] = service_value;
        out["fee"] = fee;
        out["profitable"] = profitable;
        if (!as_json) {
            std::printf("service_value    %s\n", fmt(service_value).c_str());
            std::printf("fee              %s\n", fmt(fee).c_str());
            std::printf("profitable       %s\n", profitable ? "true" : "false");
        }
    }
    if (as_json) std::printf("%s\n", out.dump(2).c_str());
    return kExitOk;
}

struct SweepArgs {
    SweepSpec spec;
    std::string alpha_text = "0.05";
    std::string metric_text = "rho_L";
    std::string strategy_text = "stubborn";
    std::string level_text;
    std::string out_path = "-";
    std::string format = "csv";
};

int cmd_sweep(SweepArgs& args)
{
    args.spec.metric = parse_metric(args.metric_text);
    args.spec.strategy = parse_strategy(args.strategy_text);
    if (!args.level_text.empty()) args.spec.level = parse_level(args.level_text);
    const auto rows = run_sweep(args.spec);
    const std::string payload = args.format == "json" ? to_json_string(rows) : to_csv(rows);
    if (args.out_path == "-") {
        std::fwrite(payload.data(), 1, payload.size(), stdout);
        return kExitOk;
    }
    std::ofstream file(args.out_path, std::ios::binary);
    if (!file) {
        std::fprintf(stderr, "error: cannot open '%s' for writing\n", args.out_path.c_str());
        return kExitDomain;
    }
    file.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    return kExitOk;
}

int cmd_simulate(const CommonArgs& common, const std::string& level_text, int k,
                 long long cycles, std::uint64_t seed, int workers, const std::string& metric,
                 double reward, bool as_json)
{
    const ModelParams p = common.params();
    const Strategy strategy = common.strategy();
    const StubbornLevel level = parse_level(level_text);
    const SimConfig cfg{p, strategy, level, k, cycles, seed, workers};
    if (metric == "combined" &&
        (level.is_infinite() || level.value() != static_cast<long long>(k) + 1)) {
        throw std::domain_error("combined-reward simulation requires level = k + 1");
    }
    const SimTallies tallies = run_cycles(cfg);

    json out;
    out["alpha"] = p.alpha;
    out["gamma"] = p.gamma;
    out["strategy"] = to_string(strategy);
    out["level"] = level_json(level);
    out["k"] = k;
    out["cycles"] = cycles;
    out["seed"] = seed;
    out["workers"] = workers;
    out["metric"] = metric;

    const auto zscore = [](double est, double se, double want) {
        return se > 0.0 ? std::abs(est - want) / se : 0.0;
    };

    if (!as_json) {
        std::printf("alpha     %s\ngamma     %s\nstrategy  %s\nlevel     %s\nk         %d\n",
                    fmt(p.alpha).c_str(), fmt(p.gamma).c_str(), to_string(strategy),
                    level.str().c_str(), k);
        std::printf("cycles    %lld\nseed      %" PRIu64 "\nworkers   %d\nmetric    %s\n",
                    cycles, seed, workers, metric.c_str());
    }
    if (metric == "events") {
        const EventProbs want = strategy == Strategy::stubborn
                                    ? double_spend_probs_stubborn(p, k)
                                    : double_spend_probs_stealth(p, k);
        const bool comparable = !level.is_infinite() &&
                                level.value() == static_cast<long long>(k) + 1;
        struct Row {
            const char* name;
            std::uint64_t count;
            double want;
        } items[] = {{"double_spending", tallies.double_spending, want.double_spending},
                     {"move_funds", tallies.move_funds, want.move_funds},
                     {"service", tallies.service, want.service}};
        for (const auto& item : items) {
            const auto est = detail::proportion_estimate(item.count, tallies.cycles, seed);
            json row;
            row["estimate"] = est.mean;
            row["std_error"] = est.std_error;
            if (comparable) {
                row["analytic"] = item.want;
                row["z_score"] = zscore(est.mean, est.std_error, item.want);
            }
            out[item.name] = row;
            if (!as_json) {
                std::printf("%s: estimate %s std_error %s", item.name, fmt(est.mean).c_str(),
                            fmt(est.std_error).c_str());
                if (comparable) {
                    std::printf(" analytic %s z %.2f", fmt(item.want).c_str(),
                                zscore(est.mean, est.std_error, item.want));
                }
                std::printf("\n");
            }
        }
    } else {
        const double use_reward = metric == "combined" ? reward : 0.0;
        const auto est = detail::ratio_estimate(tallies, use_reward, seed);
        double want = 0.0;
        if (metric == "combined") {
            want = strategy == Strategy::stubborn
                       ? combined_revenue_stubborn(p, {k, use_reward})
                       : combined_revenue_stealth(p, {k, use_reward});
        } else {
            want = strategy == Strategy::stubborn ? revenue_stubborn(p, level).ratio
                                                  : revenue_stealth(p, level).ratio;
        }
        out["estimate"] = est.mean;
        out["std_error"] = est.std_error;
        out["analytic"] = want;
        out["z_score"] = zscore(est.mean, est.std_error, want);
        if (metric == "combined") out["reward"] = use_reward;
        if (!as_json) {
            std::printf("estimate   %s\nstd_error  %s\nanalytic   %s\nz_score    %.2f\n",
                        fmt(est.mean).c_str(), fmt(est.std_error).c_str(), fmt(want).c_str(),
                        zscore(est.mean, est.std_error, want));
        }
    }
    out["truncated_cycles"] = tallies.truncated;
    if (as_json) std::printf("%s\n", out.dump(2).c_str());
    if (tallies.truncated > 0) {
        std::fprintf(stderr, "warning: %" PRIu64 " cycle(s) hit the arrival cap\n",
                     tallies.truncated);
        return kExitCap;
    }
    return kExitOk;
}

int cmd_tables(int table, bool as_json)
{
    if (table == 1) {
        const auto rows = revenue_table_gamma0();
        if (as_json) {
            json arr = json::array();
            for (const auto& r : rows) {
                arr.push_back({{"alpha", r.alpha},
                               {"rho_2", r.rho2},
                               {"rho_best", r.rho_best},
                               {"best_level", level_json(r.best_level)}});
            }
            std::printf("%s\n", arr.dump(2).c_str());
            return kExitOk;
        }
        std::printf("closed-form revenue ratios at gamma = 0\n");
        std::printf("%-10s %-10s %-10s %s\n", "alpha", "rho_2", "rho_L*", "L*");
        for (const auto& r : rows) {
            std::printf("%-10.5f %-10.5f %-10.5f %s\n", r.alpha, r.rho2, r.rho_best,
                        r.best_level.str().c_str());
        }
        std::printf("note: external MDP-solver comparison columns are not reproduced\n");
        return kExitOk;
    }
    if (table == 2) {
        const auto rows = revenue_table_gamma_grid();
        if (as_json) {
            json arr = json::array();
            for (const auto& r : rows) {
                json row;
                row["alpha"] = r.alpha;
                for (std::size_t j = 0; j < kGridTableGammas.size(); ++j) {
                    row["gamma_" + std::to_string(kGridTableGammas[j]).substr(0, 3)] =
                        r.rho_best[j];
                }
                arr.push_back(row);
            }
            std::printf("%s\n", arr.dump(2).c_str());
            return kExitOk;
        }
        std::printf("optimal-level revenue ratio rho_L* by network influence\n");
        std::printf("%-8s", "alpha");
        for (const double g : kGridTableGammas) std::printf(" gamma=%-4.1f", g);
        std::printf("\n");
        for (const auto& r : rows) {
            std::printf("%-8.2f", r.alpha);
            for (const double v : r.rho_best) std::printf(" %-10.3f", v);
            std::printf("\n");
        }
        std::printf("note: external MDP-solver comparison columns are not reproduced\n");
        return kExitOk;
    }
    throw std::domain_error("table must be 1 or 2");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"block-withholding attack calculator for longest-chain proof of work"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "emit machine-readable JSON");
    std::uint64_t global_seed = 1;
    auto* global_seed_opt =
        app.add_option("--seed", global_seed, "default random seed for simulate");
    int global_workers = 1;
    auto* global_workers_opt =
        app.add_option("--workers", global_workers, "default worker threads");

    CommonArgs rev_args;
    std::string rev_level = "2";
    auto* revenue = app.add_subcommand("revenue", "revenue ratio of a withholding strategy");
    add_common(revenue, rev_args);
    revenue->add_option("--level", rev_level, "withholding depth (integer >= 1 or 'inf')")
        ->required();

    CommonArgs opt_args;
    long long opt_cap = 512;
    auto* optimal = app.add_subcommand("optimal", "optimal and maximal profitable depths");
    add_common(optimal, opt_args);
    optimal->add_option("--cap", opt_cap, "scan cap for degenerate and fallback paths");

    CommonArgs ds_args;
    int ds_k = 6;
    double ds_reward = 0.0, ds_value = 0.0, ds_fee = 0.0;
    auto* doublespend =
        app.add_subcommand("doublespend", "per-cycle confirmation-risk probabilities");
    add_common(doublespend, ds_args);
    doublespend->add_option("--k", ds_k, "confirmation depth")->required();
    auto* reward_opt = doublespend->add_option(
        "--reward", ds_reward, "double-spend value per replaced block (block rewards)");
    auto* value_opt =
        doublespend->add_option("--service-value", ds_value, "value recovered per double spend");
    auto* fee_opt = doublespend->add_option("--fee", ds_fee, "fee paid for the service");
    value_opt->needs(fee_opt);
    fee_opt->needs(value_opt);

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "grid sweep over alpha and gamma, CSV or JSON");
    sweep->add_option("--alpha-start", sweep_args.spec.alpha_start, "alpha range start");
    sweep->add_option("--alpha-stop", sweep_args.spec.alpha_stop, "alpha range stop");
    sweep->add_option("--alpha-step", sweep_args.spec.alpha_step, "alpha range step");
    sweep->add_option("--gamma-start", sweep_args.spec.gamma_start, "gamma range start");
    sweep->add_option("--gamma-stop", sweep_args.spec.gamma_stop, "gamma range stop");
    sweep->add_option("--gamma-step", sweep_args.spec.gamma_step, "gamma range step");
    sweep->add_option("--metric", sweep_args.metric_text,
                      "rho_L sigma_S L_star S_star L_bar S_bar ds_prob_stubborn "
                      "ds_prob_stealth move_funds service r_star normalized_ratio");
    sweep->add_option("--strategy", sweep_args.strategy_text, "stubborn | stealth")
        ->check(CLI::IsMember({"stubborn", "stealth"}));
    sweep->add_option("--level", sweep_args.level_text, "fixed depth for revenue metrics");
    sweep->add_option("--k", sweep_args.spec.k, "fixed confirmation depth for risk metrics");
    sweep->add_option("--cap", sweep_args.spec.cap, "scan cap");
    sweep->add_option("--workers", sweep_args.spec.workers, "parallel workers");
    sweep->add_option("--out", sweep_args.out_path, "output path ('-' for stdout)");
    sweep->add_option("--format", sweep_args.format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));

    CommonArgs sim_args;
    std::string sim_level = "7";
    int sim_k = 6;
    long long sim_cycles = 1'000'000;
    std::uint64_t sim_seed = 1;
    int sim_workers = 1;
    std::string sim_metric = "revenue";
    double sim_reward = 0.0;
    auto* simulate = app.add_subcommand("simulate", "seeded Monte Carlo attack-cycle estimates");
    add_common(simulate, sim_args);
    simulate->add_option("--level", sim_level, "withholding depth (integer or 'inf')")
        ->required();
    simulate->add_option("--k", sim_k, "confirmation depth");
    simulate->add_option("--cycles", sim_cycles, "number of attack cycles");
    simulate->add_option("--seed", sim_seed, "random seed");
    simulate->add_option("--workers", sim_workers, "worker threads");
    simulate->add_option("--metric", sim_metric, "revenue | events | combined")
        ->check(CLI::IsMember({"revenue", "events", "combined"}));
    simulate->add_option("--reward", sim_reward, "double-spend value for the combined metric");

    int table_id = 1;
    auto* tables = app.add_subcommand("tables", "reference revenue tables");
    tables->add_option("--table", table_id, "1 or 2")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    // app-level --seed / --workers act as defaults for the subcommand options
    if (global_seed_opt->count() > 0 && simulate->get_option("--seed")->count() == 0) {
        sim_seed = global_seed;
    }
    if (global_workers_opt->count() > 0) {
        if (simulate->get_option("--workers")->count() == 0) sim_workers = global_workers;
        if (sweep->get_option("--workers")->count() == 0) {
            sweep_args.spec.workers = global_workers;
        }
    }

    try {
        if (*revenue) return cmd_revenue(rev_args, rev_level, as_json);
        if (*optimal) return cmd_optimal(opt_args, opt_cap, as_json);
        if (*doublespend) {
            return cmd_doublespend(ds_args, ds_k, reward_opt->count() > 0, ds_reward,
                                   value_opt->count() > 0, ds_value, ds_fee, as_json);
        }
        if (*sweep) return cmd_sweep(sweep_args);
        if (*simulate) {
            return cmd_simulate(sim_args, sim_level, sim_k, sim_cycles, sim_seed, sim_workers,
                                sim_metric, sim_reward, as_json);
        }
        if (*tables) return cmd_tables(table_id, as_json);
    } catch (const CapExceeded& e) {
        std::fprintf(stderr, "error: %s (cap %lld, best ratio at cap %.6f, unbounded ratio "
                             "%.6f)\n",
                     e.what(), e.cap(), e.best_ratio_at_cap(), e.infinite_ratio());
        return kExitCap;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDomain;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDomain;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}
