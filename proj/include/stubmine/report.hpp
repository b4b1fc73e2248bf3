#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "stubmine/analytic.hpp"
#include "stubmine/optimize.hpp"

namespace stubmine {

enum class SweepMetric {
    rho_l,
    sigma_s,
    l_star,
    s_star,
    l_bar,
    s_bar,
    ds_prob_stubborn,
    ds_prob_stealth,
    move_funds,
    service,
    r_star,
    normalized_ratio,
};

inline const char* to_string(SweepMetric m)
{
    switch (m) {
    case SweepMetric::rho_l: return "rho_L";
    case SweepMetric::sigma_s: return "sigma_S";
    case SweepMetric::l_star: return "L_star";
    case SweepMetric::s_star: return "S_star";
    case SweepMetric::l_bar: return "L_bar";
    case SweepMetric::s_bar: return "S_bar";
    case SweepMetric::ds_prob_stubborn: return "ds_prob_stubborn";
    case SweepMetric::ds_prob_stealth: return "ds_prob_stealth";
    case SweepMetric::move_funds: return "move_funds";
    case SweepMetric::service: return "service";
    case SweepMetric::r_star: return "r_star";
    case SweepMetric::normalized_ratio: return "normalized_ratio";
    }
    return "?";
}

inline SweepMetric parse_metric(const std::string& name)
{
    static const std::pair<const char*, SweepMetric> table[] = {
        {"rho_L", SweepMetric::rho_l},
        {"sigma_S", SweepMetric::sigma_s},
        {"L_star", SweepMetric::l_star},
        {"S_star", SweepMetric::s_star},
        {"L_bar", SweepMetric::l_bar},
        {"S_bar", SweepMetric::s_bar},
        {"ds_prob_stubborn", SweepMetric::ds_prob_stubborn},
        {"ds_prob_stealth", SweepMetric::ds_prob_stealth},
        {"move_funds", SweepMetric::move_funds},
        {"service", SweepMetric::service},
        {"r_star", SweepMetric::r_star},
        {"normalized_ratio", SweepMetric::normalized_ratio},
    };
    for (const auto& [n, m] : table) {
        if (name == n) return m;
    }
    throw std::invalid_argument("unknown sweep metric: " + name);
}

// One grid cell of a sweep. A +infinity value serializes as the literal
// "inf" (unbounded level, or an unattainable break-even value).
struct ReportRow {
    double alpha = 0.0;
    double gamma = 0.0;
    double value = 0.0;
    std::vector<std::pair<std::string, double>> aux;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct SweepSpec {
    double alpha_start = 0.05, alpha_stop = 0.45, alpha_step = 0.05;
    double gamma_start = 0.0, gamma_stop = 1.0, gamma_step = 0.1;
    SweepMetric metric = SweepMetric::rho_l;
    Strategy strategy = Strategy::stubborn;
    std::optional<StubbornLevel> level; // for rho_L / sigma_S / normalized_ratio
    int k = 6;
    long long cap = 512;
    int workers = 1;

    bool needs_level() const
    {
        return metric == SweepMetric::rho_l || metric == SweepMetric::sigma_s ||
               metric == SweepMetric::normalized_ratio;
    }

    bool needs_k() const
    {
        return metric == SweepMetric::ds_prob_stubborn || metric == SweepMetric::ds_prob_stealth ||
               metric == SweepMetric::move_funds || metric == SweepMetric::service ||
               metric == SweepMetric::r_star;
    }

    void validate() const
    {
        if (!(alpha_step > 0.0) || !(gamma_step > 0.0)) {
            throw std::invalid_argument("sweep: steps must be > 0");
        }
        if (!(alpha_start > 0.0) || !(alpha_stop < 0.5) || alpha_start > alpha_stop) {
            throw std::invalid_argument("sweep: alpha range must lie strictly inside (0, 0.5)");
        }
        if (!(gamma_start >= 0.0) || !(gamma_stop <= 1.0) || gamma_start > gamma_stop) {
            throw std::invalid_argument("sweep: gamma range must lie inside [0, 1]");
        }
        if (needs_level() && !level.has_value()) {
            throw std::invalid_argument(std::string("sweep metric ") + to_string(metric) +
                                        " requires a level");
        }
        if (needs_k() && k < 1) {
            throw std::invalid_argument(std::string("sweep metric ") + to_string(metric) +
                                        " requires k >= 1");
        }
    }
};

namespace detail {

inline std::vector<double> grid_points(double start, double stop, double step)
{
    std::vector<double> v;
    for (int i = 0;; ++i) {
        const double x = start + i * step;
        if (x > stop + step * 1e-9) break;
        v.push_back(x);
    }
    return v;
}

inline double level_value(StubbornLevel l)
{
    return l.is_infinite() ? std::numeric_limits<double>::infinity()
                           : static_cast<double>(l.value());
}

inline ReportRow sweep_cell(const SweepSpec& spec, double alpha, double gamma)
{
    const ModelParams p(alpha, gamma);
    ReportRow row;
    row.alpha = alpha;
    row.gamma = gamma;
    switch (spec.metric) {
    case SweepMetric::rho_l: {
        const auto r = revenue_stubborn(p, *spec.level);
        row.value = r.ratio;
        row.aux = {{"numerator", r.numerator()}, {"denominator", r.denominator()}};
        break;
    }
    case SweepMetric::sigma_s: {
        const auto r = revenue_stealth(p, *spec.level);
        row.value = r.ratio;
        row.aux = {{"numerator", r.numerator()}, {"denominator", r.denominator()}};
        break;
    }
    case SweepMetric::l_star: {
        const auto r = optimal_l(p, spec.cap);
        row.value = level_value(r.best_level);
        row.aux = {{"ratio", r.best_ratio}};
        break;
    }
    case SweepMetric::s_star: {
        const auto r = optimal_s(p, spec.cap);
        row.value = level_value(r.best_level);
        row.aux = {{"ratio", r.best_ratio}};
        break;
    }
    case SweepMetric::l_bar: row.value = level_value(max_profitable_l(p, spec.cap)); break;
    case SweepMetric::s_bar: row.value = level_value(max_profitable_s(p, spec.cap)); break;
    case SweepMetric::ds_prob_stubborn:
        row.value = double_spend_probs_stubborn(p, spec.k).double_spending;
        break;
    case SweepMetric::ds_prob_stealth:
        row.value = double_spend_probs_stealth(p, spec.k).double_spending;
        break;
    case SweepMetric::move_funds:
        row.value = spec.strategy == Strategy::stubborn
                        ? double_spend_probs_stubborn(p, spec.k).move_funds
                        : double_spend_probs_stealth(p, spec.k).move_funds;
        break;
    case SweepMetric::service:
        row.value = spec.strategy == Strategy::stubborn
                        ? double_spend_probs_stubborn(p, spec.k).service
                        : double_spend_probs_stealth(p, spec.k).service;
        break;
    case SweepMetric::r_star: row.value = breakeven_reward(p, spec.k, spec.strategy); break;
    case SweepMetric::normalized_ratio: {
        const auto r = spec.strategy == Strategy::stubborn ? revenue_stubborn(p, *spec.level)
                                                           : revenue_stealth(p, *spec.level);
        row.value = r.ratio / alpha;
        break;
    }
    }
    return row;
}

} // namespace detail

// Evaluates the grid, alpha ascending outer and gamma ascending inner. Cells
// are independent; parallel workers write into their own index slots, so the
// row order is deterministic regardless of scheduling.
inline std::vector<ReportRow> run_sweep(const SweepSpec& spec)
{
    spec.validate();
    const auto alphas = detail::grid_points(spec.alpha_start, spec.alpha_stop, spec.alpha_step);
    const auto gammas = detail::grid_points(spec.gamma_start, spec.gamma_stop, spec.gamma_step);
    std::vector<ReportRow> rows(alphas.size() * gammas.size());
    const int workers =
        std::max(1, std::min<int>(spec.workers, static_cast<int>(rows.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= rows.size()) break;
            const double a = alphas[i / gammas.size()];
            const double g = gammas[i % gammas.size()];
            rows[i] = detail::sweep_cell(spec, a, g);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return rows;
}

namespace detail {

inline std::string format_value(double v)
{
    if (std::isinf(v)) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace detail

// Comma-separated, header row, fixed 6-decimal values, LF line endings.
inline std::string to_csv(const std::vector<ReportRow>& rows)
{
    std::string out = "alpha,gamma,value";
    if (!rows.empty()) {
        for (const auto& [name, _] : rows.front().aux) {
            out += ',';
            out += name;
        }
    }
    out += '\n';
    for (const auto& row : rows) {
        out += detail::format_value(row.alpha);
        out += ',';
        out += detail::format_value(row.gamma);
        out += ',';
        out += detail::format_value(row.value);
        for (const auto& [_, v] : row.aux) {
            out += ',';
            out += detail::format_value(v);
        }
        out += '\n';
    }
    return out;
}

// Closed-form revenue table at gamma = 0 over the reference alpha row, with
// the level-2 ratio and the optimal-level ratio side by side.
struct DepthTableRow {
    double alpha = 0.0;
    double rho2 = 0.0;
    double rho_best = 0.0;
    StubbornLevel best_level = StubbornLevel(1);
};

inline std::vector<DepthTableRow> revenue_table_gamma0()
{
    const double alphas[] = {1.0 / 3.0, 0.35, 0.375, 0.4, 0.425, 0.45, 0.475};
    std::vector<DepthTableRow> rows;
    for (const double a : alphas) {
        const ModelParams p(a, 0.0);
        DepthTableRow r;
        r.alpha = a;
        r.rho2 = revenue_stubborn(p, 2).ratio;
        const auto best = optimal_l(p);
        r.rho_best = best.best_ratio;
        r.best_level = best.best_level;
        rows.push_back(r);
    }
    return rows;
}

// Optimal-level revenue over the alpha x gamma reference grid.
struct GridTableRow {
    double alpha = 0.0;
    std::array<double, 5> rho_best{}; // gamma in {0.2, 0.4, 0.5, 0.6, 0.8}
};

inline constexpr std::array<double, 5> kGridTableGammas = {0.2, 0.4, 0.5, 0.6, 0.8};

inline std::vector<GridTableRow> revenue_table_gamma_grid()
{
    const double alphas[] = {0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45};
    std::vector<GridTableRow> rows;
    for (const double a : alphas) {
        GridTableRow r;
        r.alpha = a;
        for (std::size_t j = 0; j < kGridTableGammas.size(); ++j) {
            r.rho_best[j] = optimal_l(ModelParams(a, kGridTableGammas[j])).best_ratio;
        }
        rows.push_back(r);
    }
    return rows;
}

} // namespace stubmine
