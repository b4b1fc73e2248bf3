#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace stubmine {

// Truncation policy for the unbounded-level series: stop once a term falls
// below kSeriesRelTol relative to the running total, hard-capped at
// kMaxSeriesTerms terms. Geometric decay at rate 4*alpha*beta < 1 guarantees
// convergence for alpha < 0.5.
inline constexpr double kSeriesRelTol = 1e-16;
inline constexpr int kMaxSeriesTerms = 10000;

namespace detail {

inline double log_factorial(int n)
{
    static const std::vector<double> table = [] {
        std::vector<double> t(8192);
        for (std::size_t i = 0; i < t.size(); ++i) {
            t[i] = std::lgamma(static_cast<double>(i) + 1.0);
        }
        return t;
    }();
    if (n < 0) throw std::domain_error("log_factorial: negative argument");
    if (static_cast<std::size_t>(n) < table.size()) return table[static_cast<std::size_t>(n)];
    return std::lgamma(static_cast<double>(n) + 1.0);
}

// Exact through n = 62; intermediates held in 128 bits.
inline std::uint64_t binomial_u64(int n, int k)
{
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    }
    return static_cast<std::uint64_t>(r);
}

} // namespace detail

inline double log_catalan(int n)
{
    if (n < 0) throw std::domain_error("catalan: n must be >= 0");
    return detail::log_factorial(2 * n) - 2.0 * detail::log_factorial(n) -
           std::log(static_cast<double>(n) + 1.0);
}

// n-th Catalan number C_n = binom(2n, n) / (n + 1). Exact integer arithmetic
// while binom(2n, n) fits 64 bits, log-gamma beyond.
inline double catalan(int n)
{
    if (n < 0) throw std::domain_error("catalan: n must be >= 0");
    if (n <= 31) {
        return static_cast<double>(detail::binomial_u64(2 * n, n) /
                                   static_cast<std::uint64_t>(n + 1));
    }
    return std::exp(log_catalan(n));
}

inline double log_pre_dyck_count(int n, int m)
{
    if (n < 0 || m < 0) throw std::domain_error("pre_dyck_count: n, m must be >= 0");
    if (m > n) throw std::domain_error("log_pre_dyck_count: requires m <= n");
    return std::log(static_cast<double>(n - m + 1)) - std::log(static_cast<double>(n + m + 1)) +
           detail::log_factorial(n + m + 1) - detail::log_factorial(n + 1) -
           detail::log_factorial(m);
}

// Ballot-style path count P[n, m]: words of n X's and m Y's in which no
// prefix holds more Y's than X's. P[n, m] = ((n-m+1)/(n+m+1)) binom(n+m+1, n+1),
// zero when m > n. Satisfies P[n, m] = P[n, m-1] + P[n-1, m] and P[n, n] = C_n.
inline double pre_dyck_count(int n, int m)
{
    if (n < 0 || m < 0) throw std::domain_error("pre_dyck_count: n, m must be >= 0");
    if (m > n) return 0.0;
    if (n + m + 1 <= 62) {
        const unsigned __int128 b = detail::binomial_u64(n + m + 1, n + 1);
        return static_cast<double>(static_cast<std::uint64_t>(
            b * static_cast<unsigned>(n - m + 1) / static_cast<unsigned>(n + m + 1)));
    }
    return std::exp(log_pre_dyck_count(n, m));
}

// Generating function of the Catalan numbers, C(x) = 2 / (1 + sqrt(1 - 4x)),
// valid on [0, 1/4].
inline double catalan_generating(double x)
{
    if (!(x >= 0.0) || !(x <= 0.25)) {
        throw std::domain_error("catalan_generating: x must lie in [0, 1/4]");
    }
    return 2.0 / (1.0 + std::sqrt(1.0 - 4.0 * x));
}

// Expected number of extra adversarial arrivals while a lead of gap+1 shrinks
// to 1 under Bernoulli(alpha) labels: gap * alpha / (1 - 2 alpha), by Wald's
// identity. The stopping time diverges as alpha approaches 0.5.
inline double wald_extension(int gap, double alpha)
{
    if (gap < 1) throw std::domain_error("wald_extension: gap must be >= 1");
    if (!(alpha > 0.0) || !(alpha < 0.5)) {
        throw std::domain_error("wald_extension: requires 0 < alpha < 0.5");
    }
    return static_cast<double>(gap) * alpha / (1.0 - 2.0 * alpha);
}

} // namespace stubmine
