#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "stubmine/combinatorics.hpp"
#include "stubmine/model.hpp"

namespace stubmine {

// P_s(l, m): the private chain reaches length l during a cycle while the
// public chain peaks at m < l. Equals P[l-1, m] * alpha^l * beta^m.
inline double success_prob(const ModelParams& p, long long l, long long m)
{
    if (l < 1) throw std::domain_error("success_prob: l must be >= 1");
    if (m < 0 || m >= l) throw std::domain_error("success_prob: requires 0 <= m < l");
    const double a = p.alpha;
    const double b = p.beta();
    const int li = static_cast<int>(l);
    const int mi = static_cast<int>(m);
    if (l + m <= 62) {
        return pre_dyck_count(li - 1, mi) * std::pow(a, static_cast<double>(l)) *
               std::pow(b, static_cast<double>(m));
    }
    return std::exp(log_pre_dyck_count(li - 1, mi) + static_cast<double>(l) * std::log(a) +
                    static_cast<double>(m) * std::log(b));
}

// P_u(n): the cycle fails with the public chain ending at height n + 1.
// Equals C_n * alpha^n * beta^(n+1).
inline double unsuccess_prob(const ModelParams& p, long long n)
{
    if (n < 0) throw std::domain_error("unsuccess_prob: n must be >= 0");
    const double a = p.alpha;
    const double b = p.beta();
    const int ni = static_cast<int>(n);
    if (2 * n <= 62) {
        return catalan(ni) * std::pow(a, static_cast<double>(n)) *
               std::pow(b, static_cast<double>(n + 1));
    }
    return std::exp(log_catalan(ni) + static_cast<double>(n) * std::log(a) +
                    static_cast<double>(n + 1) * std::log(b));
}

// P_u(n, i): as unsuccess_prob with exactly i adversarial blocks in the final
// public-chain prefix. The gamma factor enters only for i > 0.
inline double unsuccess_prefix_prob(const ModelParams& p, long long n, long long i)
{
    if (n < 0) throw std::domain_error("unsuccess_prefix_prob: n must be >= 0");
    if (i < 0 || i > n) throw std::domain_error("unsuccess_prefix_prob: requires 0 <= i <= n");
    double w = std::pow(1.0 - p.gamma, static_cast<double>(n - i));
    if (i != 0) w *= p.gamma;
    return unsuccess_prob(p, n) * w;
}

namespace detail {

struct RevenueParts {
    double successful = 0.0;              // expected adversarial blocks from winning cycles
    double unsuccessful_adversarial = 0.0; // expected matched prefix blocks from losing cycles
    double unsuccessful_total = 0.0;       // expected offset growth from losing cycles
};

// Levels beyond any practical scan would only burn time: summands vanish long
// before this bound, so reject instead of grinding.
inline constexpr long long kMaxFiniteLevel = 1'000'000;

// Mean adversarial-prefix length of a failed cycle at height n + 1 obeys
// E_n = (1 - gamma) E_{n-1} + n gamma with E_0 = 0.
inline RevenueParts stubborn_parts_finite(const ModelParams& p, long long level)
{
    if (level > kMaxFiniteLevel) {
        throw std::domain_error("finite level too large; use the unbounded level instead");
    }
    RevenueParts out;
    const double w = p.alpha / (1.0 - 2.0 * p.alpha);
    for (long long m = 0; m < level; ++m) {
        out.successful += success_prob(p, level, m) *
                          (static_cast<double>(level) + static_cast<double>(level - m - 1) * w);
    }
    double mean_prefix = 0.0;
    for (long long n = 0; n < level; ++n) {
        if (n > 0) mean_prefix = (1.0 - p.gamma) * mean_prefix + static_cast<double>(n) * p.gamma;
        const double pu = unsuccess_prob(p, n);
        out.unsuccessful_adversarial += pu * mean_prefix;
        out.unsuccessful_total += pu * static_cast<double>(n + 1);
    }
    return out;
}

// Unbounded level: no cycle ever wins; both failure sums run to the series
// tail. P_u steps by P_u(n)/P_u(n-1) = 2(2n-1)/(n+1) * alpha * beta.
inline RevenueParts stubborn_parts_infinite(const ModelParams& p)
{
    RevenueParts out;
    const double ab = p.alpha * p.beta();
    double pu = p.beta();
    double mean_prefix = 0.0;
    for (int n = 0; n < kMaxSeriesTerms; ++n) {
        if (n > 0) {
            pu *= 2.0 * (2.0 * n - 1.0) / (n + 1.0) * ab;
            mean_prefix = (1.0 - p.gamma) * mean_prefix + static_cast<double>(n) * p.gamma;
        }
        const double term = pu * static_cast<double>(n + 1);
        out.unsuccessful_adversarial += pu * mean_prefix;
        out.unsuccessful_total += term;
        if (term < kSeriesRelTol * out.unsuccessful_total) break;
    }
    return out;
}

// Closed form of the equal-fork ratio,
//   alpha/beta - (1-2 alpha)(1-gamma)/(beta gamma) * (1 - beta C((1-gamma) alpha beta)).
// Divides by gamma, so callers switch to the series below 1e-6.
inline double equal_fork_ratio_closed(const ModelParams& p)
{
    const double a = p.alpha;
    const double b = p.beta();
    const double g = p.gamma;
    const double cgen = catalan_generating((1.0 - g) * a * b);
    return a / b - (1.0 - 2.0 * a) * (1.0 - g) / (b * g) * (1.0 - b * cgen);
}

} // namespace detail

// Revenue ratio of depth-L withholding with its block decomposition. Level 1
// is honest mining (ratio alpha); level 2 the classic withholding attack; the
// unbounded level never releases early and earns only through matched
// prefixes of losing cycles.
inline RevenueReport revenue_stubborn(const ModelParams& p, StubbornLevel level)
{
    if (level.is_infinite()) {
        const auto parts = detail::stubborn_parts_infinite(p);
        const double ratio =
            p.gamma < 1e-6
                ? (parts.unsuccessful_total > 0.0
                       ? parts.unsuccessful_adversarial / parts.unsuccessful_total
                       : 0.0)
                : detail::equal_fork_ratio_closed(p);
        return RevenueReport{ratio, 0.0, parts.unsuccessful_adversarial,
                             parts.unsuccessful_total};
    }
    const auto parts = detail::stubborn_parts_finite(p, level.value());
    const double num = parts.successful + parts.unsuccessful_adversarial;
    const double den = parts.successful + parts.unsuccessful_total;
    return RevenueReport{num / den, parts.successful, parts.unsuccessful_adversarial,
                         parts.unsuccessful_total};
}

// Stealth variant: matching happens only at the level-1 tie, so losing cycles
// pay out only the single matched prefix P_u(S-1) * gamma * (S-1). The
// unbounded stealth level never matches and earns nothing.
inline RevenueReport revenue_stealth(const ModelParams& p, StubbornLevel level)
{
    if (level.is_infinite()) {
        const auto parts = detail::stubborn_parts_infinite(p);
        return RevenueReport{0.0, 0.0, 0.0, parts.unsuccessful_total};
    }
    const long long s = level.value();
    const auto parts = detail::stubborn_parts_finite(p, s);
    const double matched =
        s >= 2 ? unsuccess_prob(p, s - 1) * p.gamma * static_cast<double>(s - 1) : 0.0;
    const double num = parts.successful + matched;
    const double den = parts.successful + parts.unsuccessful_total;
    return RevenueReport{num / den, parts.successful, matched, parts.unsuccessful_total};
}

// Cycle-outcome probabilities for depth-(k+1) withholding under the
// k-confirmation rule. The survival exponent drops by one at m = k: a block
// already buried k-deep cannot be saved by the final prefix switch.
inline EventProbs double_spend_probs_stubborn(const ModelParams& p, int k)
{
    if (k < 1) throw std::domain_error("double_spend_probs: k must be >= 1");
    const double g = p.gamma;
    double ds = 0.0;
    double pw = 1.0;      // (1-gamma)^m
    double pw_prev = 1.0; // (1-gamma)^(m-1)
    for (int m = 0; m <= k; ++m) {
        const double surv = (m == k) ? pw_prev : pw;
        ds += success_prob(p, k + 1, m) * surv;
        pw_prev = pw;
        pw *= 1.0 - g;
    }
    ds += unsuccess_prob(p, k) * std::pow(1.0 - g, static_cast<double>(k - 1)) * g;
    double service = 0.0;
    double w = 1.0;
    for (int m = 0; m <= k; ++m) {
        service += unsuccess_prob(p, m) * w;
        w *= 1.0 - g;
    }
    // Without influence no honest block ever builds on a released branch, so
    // the height-1 honest block either enters the offset chain or is
    // overridden: move-funds cannot occur.
    const double move = g == 0.0 ? 0.0 : std::max(0.0, 1.0 - ds - service);
    return EventProbs{ds, move, service};
}

// Stealth counterpart: every winning cycle double-spends, and a losing cycle
// can only via the terminal prefix switch. Move-funds cannot occur.
inline EventProbs double_spend_probs_stealth(const ModelParams& p, int k)
{
    if (k < 1) throw std::domain_error("double_spend_probs: k must be >= 1");
    double ds = 0.0;
    for (int m = 0; m <= k; ++m) ds += success_prob(p, k + 1, m);
    ds += unsuccess_prob(p, k) * p.gamma;
    return EventProbs{ds, 0.0, 1.0 - ds};
}

namespace detail {

// The combined ratio is affine in the double-spend value R:
// value(R) = (num0 + slope * R) / den.
struct AffineRatio {
    double num0 = 0.0;
    double slope = 0.0;
    double den = 0.0;

    double at(double reward) const { return (num0 + slope * reward) / den; }
};

inline AffineRatio combined_parts(const ModelParams& p, int k, Strategy strategy)
{
    if (k < 1) throw std::domain_error("combined revenue: k must be >= 1");
    const double w = p.alpha / (1.0 - 2.0 * p.alpha);
    const auto parts = stubborn_parts_finite(p, k + 1);
    if (strategy == Strategy::stubborn) {
        double slope = 0.0;
        double pw = 1.0;
        double pw_prev = 1.0;
        for (int m = 0; m <= k; ++m) {
            const double surv = (m == k) ? pw_prev : pw;
            slope += success_prob(p, k + 1, m) * surv * (1.0 + static_cast<double>(k - m) * w);
            pw_prev = pw;
            pw *= 1.0 - p.gamma;
        }
        slope += unsuccess_prob(p, k) * std::pow(1.0 - p.gamma, static_cast<double>(k - 1)) *
                 p.gamma;
        return AffineRatio{parts.successful + parts.unsuccessful_adversarial, slope,
                           parts.successful + parts.unsuccessful_total};
    }
    const double matched = unsuccess_prob(p, k) * p.gamma * static_cast<double>(k);
    double slope = 0.0;
    for (int m = 0; m <= k; ++m) {
        slope += success_prob(p, k + 1, m) * (1.0 + static_cast<double>(k - m) * w);
    }
    slope += unsuccess_prob(p, k) * p.gamma;
    return AffineRatio{parts.successful + matched, slope,
                       parts.successful + parts.unsuccessful_total};
}

} // namespace detail

// Combined revenue ratio of depth-(k+1) withholding when every replaced
// confirmed block pays R extra block rewards. Reduces to the plain ratio at
// R = 0.
inline double combined_revenue_stubborn(const ModelParams& p, const CombinedRevenueParams& cfg)
{
    return detail::combined_parts(p, cfg.k, Strategy::stubborn).at(cfg.reward);
}

inline double combined_revenue_stealth(const ModelParams& p, const CombinedRevenueParams& cfg)
{
    return detail::combined_parts(p, cfg.k, Strategy::stealth).at(cfg.reward);
}

// Smallest double-spend value that lifts the combined ratio to at least
// alpha. The combined ratio is affine and nondecreasing in R, so this is a
// closed-form solve; +infinity when no finite value can compensate.
inline double breakeven_reward(const ModelParams& p, int k, Strategy strategy)
{
    const auto ar = detail::combined_parts(p, k, strategy);
    if (ar.num0 / ar.den >= p.alpha) return 0.0;
    if (!(ar.slope > 0.0)) return std::numeric_limits<double>::infinity();
    return (p.alpha * ar.den - ar.num0) / ar.slope;
}

// Whether the depth-(k+1) attack beats honest mining on average when a single
// double-spend per cycle recovers value v against a fee f >= v. The stealth
// inequality credits the full v (every win double-spends) and loses the fee
// only on service.
inline bool service_profitability(const ModelParams& p, int k, double v, double f,
                                  Strategy strategy)
{
    if (k < 1) throw std::domain_error("service_profitability: k must be >= 1");
    if (!(v >= 0.0) || !(f >= v)) {
        throw std::domain_error("service_profitability: requires f >= v >= 0");
    }
    const auto parts = detail::stubborn_parts_finite(p, k + 1);
    if (strategy == Strategy::stubborn) {
        const auto ev = double_spend_probs_stubborn(p, k);
        const double lhs =
            parts.successful + parts.unsuccessful_adversarial + v * ev.double_spending;
        const double rhs = p.alpha * (parts.successful + parts.unsuccessful_total) +
                           (f - v) * ev.service;
        return lhs >= rhs;
    }
    const auto ev = double_spend_probs_stealth(p, k);
    const double matched = unsuccess_prob(p, k) * p.gamma * static_cast<double>(k);
    const double lhs = parts.successful + matched + v;
    const double rhs = p.alpha * (parts.successful + parts.unsuccessful_total) + f * ev.service;
    return lhs >= rhs;
}

} // namespace stubmine
