#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "stubmine/analytic.hpp"

namespace stubmine {

enum class OptimizeMethod { fixed_point, scan_fallback };

inline const char* to_string(OptimizeMethod m)
{
    return m == OptimizeMethod::fixed_point ? "fixed_point" : "scan_fallback";
}

struct OptimizerResult {
    StubbornLevel best_level;
    double best_ratio = 0.0;
    int iterations = 0;
    OptimizeMethod method = OptimizeMethod::fixed_point;
};

// One-step lookahead quantities for the release-or-wait decision at a lead of
// one: u = 1 - gamma and v_a = (1 - gamma (1 - rho_a)/(1 - 2 alpha)) / u.
struct NarrowDecision {
    double u = 0.0;
    double v = 0.0;
};

inline NarrowDecision narrow_decision(const ModelParams& p, double rho)
{
    const double u = 1.0 - p.gamma;
    if (!(u > 0.0)) throw std::domain_error("narrow_decision: v is undefined at gamma = 1");
    return NarrowDecision{u, (1.0 - p.gamma * (1.0 - rho) / (1.0 - 2.0 * p.alpha)) / u};
}

namespace detail {

// ceil with a snap guard: float jitter near an integer argument must not push
// the fixed-point iteration off by one.
inline long long guarded_ceil(double x)
{
    const double r = std::round(x);
    if (std::abs(x - r) < 1e-9) return static_cast<long long>(r);
    return static_cast<long long>(std::ceil(x));
}

// Comparison tolerance for level scans. The ratio sequence converges to its
// unbounded limit, so adjacent differences shrink below the float noise
// floor; a "decrease" only counts beyond this tolerance, while best-level
// updates use plain >= so exact ties resolve to the larger level.
inline constexpr double kScanTol = 1e-12;

// Forward unimodal walk from a known-profitable starting level. Stops at the
// first decrease beyond kScanTol (quasiconcavity makes it final); if the
// sequence never decreases up to the cap it has merged into its unbounded
// limit, which then takes the tie.
template <class RatioFn>
OptimizerResult scan_forward(RatioFn ratio_at, long long start, double start_ratio,
                             long long cap, double inf_ratio, OptimizeMethod method,
                             int iterations)
{
    double best = start_ratio;
    long long best_level = start;
    double prev = start_ratio;
    for (long long l = start + 1; l <= cap; ++l) {
        const double r = ratio_at(l);
        if (r >= best) {
            best = r;
            best_level = l;
        }
        if (r < prev - kScanTol) {
            if (inf_ratio >= best) {
                return OptimizerResult{StubbornLevel::infinite(), inf_ratio, iterations, method};
            }
            return OptimizerResult{StubbornLevel(best_level), best, iterations, method};
        }
        prev = r;
    }
    if (inf_ratio >= best - kScanTol) {
        return OptimizerResult{StubbornLevel::infinite(), inf_ratio, iterations, method};
    }
    throw CapExceeded("optimal-level scan still nondecreasing at the cap with the unbounded "
                      "ratio below the best finite value",
                      cap, best, inf_ratio);
}

} // namespace detail

// Brute-force unimodal scan, valid for any quasiconcave ratio sequence. Ties
// resolve to the larger level; the unbounded level wins ties against finite
// peaks. Used as the cross-validation oracle and for gamma in {0, 1}.
inline OptimizerResult scan_optimal_l(const ModelParams& p, long long cap = 512)
{
    if (cap < 2) throw std::invalid_argument("scan_optimal_l: cap must be >= 2");
    const double inf_ratio = revenue_stubborn(p, StubbornLevel::infinite()).ratio;
    const double rho1 = revenue_stubborn(p, 1).ratio;
    return detail::scan_forward([&](long long l) { return revenue_stubborn(p, l).ratio; }, 1,
                                rho1, cap, inf_ratio, OptimizeMethod::scan_fallback, 0);
}

inline OptimizerResult scan_optimal_s(const ModelParams& p, long long cap = 512)
{
    if (cap < 2) throw std::invalid_argument("scan_optimal_s: cap must be >= 2");
    // sigma decays to zero at the unbounded level, so the walk always ends
    // at a finite peak for sane caps
    const double s1 = revenue_stealth(p, 1).ratio;
    return detail::scan_forward([&](long long s) { return revenue_stealth(p, s).ratio; }, 1, s1,
                                cap, -1.0, OptimizeMethod::scan_fallback, 0);
}

// Fixed-point search for the revenue-maximizing withholding depth. Seeds at
// the best of levels {1, 2, unbounded}, returns unbounded when the seed's
// decision margin v is nonpositive, and otherwise iterates
// L <- ceil(log v_L / log u) to its fixed point. gamma in {0, 1} degenerates
// log u and is routed to the quasiconcave scan instead.
inline OptimizerResult optimal_l(const ModelParams& p, long long l_cap = 512)
{
    if (l_cap < 2) throw std::invalid_argument("optimal_l: cap must be >= 2");
    if (p.gamma <= 0.0 || p.gamma >= 1.0) return scan_optimal_l(p, l_cap);

    const double rho1 = revenue_stubborn(p, 1).ratio;
    const double rho2 = revenue_stubborn(p, 2).ratio;
    const double rho_inf = revenue_stubborn(p, StubbornLevel::infinite()).ratio;

    StubbornLevel seed = StubbornLevel(1);
    double seed_rho = rho1;
    if (rho_inf >= rho1 && rho_inf >= rho2) { // ties resolve to the larger level
        seed = StubbornLevel::infinite();
        seed_rho = rho_inf;
    } else if (rho2 >= rho1) {
        seed = StubbornLevel(2);
        seed_rho = rho2;
    }

    if (narrow_decision(p, seed_rho).v <= 0.0) {
        return OptimizerResult{StubbornLevel::infinite(), rho_inf, 0,
                               OptimizeMethod::fixed_point};
    }
    if (!seed.is_infinite() && seed.value() == 1) {
        return OptimizerResult{seed, rho1, 0, OptimizeMethod::fixed_point};
    }

    const double log_u = std::log(1.0 - p.gamma);
    StubbornLevel cur = seed;
    double cur_rho = seed_rho;
    for (int it = 1; it <= 10; ++it) {
        const double v = narrow_decision(p, cur_rho).v;
        if (!(v > 0.0)) break; // cannot happen on a convergent run; rescan
        long long next = detail::guarded_ceil(std::log(v) / log_u);
        if (next < 1) next = 1;
        if (!cur.is_infinite() && next == cur.value()) {
            // The iteration lands on the smallest member of an exactly tied
            // optimum (e.g. rho_1 = rho_2 = alpha on the profitability
            // boundary); walk forward so ties resolve to the largest level.
            return detail::scan_forward([&](long long l) { return revenue_stubborn(p, l).ratio; },
                                        cur.value(), cur_rho, l_cap, rho_inf,
                                        OptimizeMethod::fixed_point, it);
        }
        cur = StubbornLevel(next);
        cur_rho = revenue_stubborn(p, cur).ratio;
    }
    return scan_optimal_l(p, l_cap); // safety net; not expected to trigger
}

namespace detail {

// Largest x with g(x) >= sigma, where the stealth release-decision margin
//   g(x) = 1 - gamma (1-2a)/(a b) (x^2-1)/(2(2x-1)) - (1-2a)((1-gamma) x + 1)
// rearranges into a concave quadratic for x > 1/2. Returns nullopt when no
// admissible root passes the sup-membership check.
inline std::optional<double> stealth_decision_sup(const ModelParams& p, double sigma)
{
    const double d = 1.0 - 2.0 * p.alpha;
    const double c = p.gamma * d / (p.alpha * p.beta());
    const double qa = -(4.0 * d * (1.0 - p.gamma) + c);
    const double qb = 4.0 * (1.0 - sigma - d) + 2.0 * d * (1.0 - p.gamma);
    const double qc = -2.0 * (1.0 - sigma - d) + c;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (!(disc >= 0.0)) return std::nullopt;
    const double root = (-qb - std::sqrt(disc)) / (2.0 * qa); // larger root since qa < 0
    if (!(root > 0.5)) return std::nullopt;
    const auto g = [&](double x) {
        return 1.0 - c * (x * x - 1.0) / (2.0 * (2.0 * x - 1.0)) -
               d * ((1.0 - p.gamma) * x + 1.0);
    };
    if (!(g(root) >= sigma - 1e-7)) return std::nullopt;
    if (!(g(root + 1e-6) < sigma + 1e-7)) return std::nullopt;
    return root;
}

} // namespace detail

// Fixed-point search for the revenue-maximizing stealth depth: seed at the
// better of levels {1, 2}, then iterate S <- ceil(f(sigma_S)). The stealth
// ratio vanishes at the unbounded level, so the optimum is always finite.
inline OptimizerResult optimal_s(const ModelParams& p, long long s_cap = 512)
{
    if (s_cap < 2) throw std::invalid_argument("optimal_s: cap must be >= 2");
    const double s1 = revenue_stealth(p, 1).ratio;
    const double s2 = revenue_stealth(p, 2).ratio;
    if (s1 > s2) {
        return OptimizerResult{StubbornLevel(1), s1, 0, OptimizeMethod::fixed_point};
    }
    long long cur = 2;
    double cur_sigma = s2;
    for (int it = 1; it <= 10; ++it) {
        const auto x = detail::stealth_decision_sup(p, cur_sigma);
        if (!x) return scan_optimal_s(p, s_cap);
        long long next = detail::guarded_ceil(*x);
        if (next < 1) next = 1;
        if (next == cur) {
            // as in optimal_l, resolve exact ties to the largest level
            return detail::scan_forward([&](long long s) { return revenue_stealth(p, s).ratio; },
                                        cur, cur_sigma, s_cap, -1.0,
                                        OptimizeMethod::fixed_point, it);
        }
        cur = next;
        cur_sigma = revenue_stealth(p, cur).ratio;
    }
    return scan_optimal_s(p, s_cap);
}

// Largest withholding depth still at least as profitable as honest mining,
// sup{L : rho_L >= alpha}. Unbounded when the equal-fork ratio itself clears
// alpha; otherwise quasiconcavity makes the first dip below alpha final.
inline StubbornLevel max_profitable_l(const ModelParams& p, long long l_cap = 512)
{
    if (l_cap < 2) throw std::invalid_argument("max_profitable_l: cap must be >= 2");
    const double inf_ratio = revenue_stubborn(p, StubbornLevel::infinite()).ratio;
    if (inf_ratio >= p.alpha) return StubbornLevel::infinite();
    const double floor = p.alpha - 1e-12; // rho_1 = alpha anchors the scan
    for (long long l = 2; l <= l_cap; ++l) {
        if (revenue_stubborn(p, l).ratio < floor) return StubbornLevel(l - 1);
    }
    throw CapExceeded("profitability scan reached the cap with the unbounded ratio below alpha",
                      l_cap, revenue_stubborn(p, l_cap).ratio, inf_ratio);
}

// Stealth counterpart, sup{S : sigma_S >= alpha}; always finite since the
// stealth ratio decays to zero.
inline StubbornLevel max_profitable_s(const ModelParams& p, long long s_cap = 512)
{
    if (s_cap < 2) throw std::invalid_argument("max_profitable_s: cap must be >= 2");
    const double floor = p.alpha - 1e-12;
    for (long long s = 2; s <= s_cap; ++s) {
        if (revenue_stealth(p, s).ratio < floor) return StubbornLevel(s - 1);
    }
    throw CapExceeded("stealth profitability scan reached the cap", s_cap,
                      revenue_stealth(p, s_cap).ratio, 0.0);
}

} // namespace stubmine
