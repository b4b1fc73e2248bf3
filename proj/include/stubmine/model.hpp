#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace stubmine {

// Adversary hashrate share alpha and network influence gamma. The honest
// share beta = 1 - alpha is always derived, never stored.
struct ModelParams {
    double alpha;
    double gamma;

    ModelParams(double alpha_, double gamma_) : alpha(alpha_), gamma(gamma_)
    {
        if (!(alpha > 0.0) || !(alpha < 0.5)) {
            throw std::domain_error("alpha must lie strictly inside (0, 0.5), got " +
                                    std::to_string(alpha_));
        }
        if (!(gamma >= 0.0) || !(gamma <= 1.0)) {
            throw std::domain_error("gamma must lie in [0, 1], got " + std::to_string(gamma_));
        }
    }

    double beta() const { return 1.0 - alpha; }
};

// Withholding depth: an integer >= 1 or the unbounded (equal-fork) level.
class StubbornLevel {
public:
    StubbornLevel(long long level) : level_(level)
    {
        if (level < 1) {
            throw std::domain_error("stubbornness level must be >= 1, got " +
                                    std::to_string(level));
        }
    }

    static StubbornLevel infinite()
    {
        StubbornLevel l;
        return l;
    }

    bool is_infinite() const { return level_ == kInfinite; }

    long long value() const
    {
        if (is_infinite()) throw std::logic_error("unbounded level has no finite value");
        return level_;
    }

    std::string str() const { return is_infinite() ? "inf" : std::to_string(level_); }

    friend bool operator==(StubbornLevel a, StubbornLevel b) { return a.level_ == b.level_; }
    friend bool operator!=(StubbornLevel a, StubbornLevel b) { return a.level_ != b.level_; }

private:
    StubbornLevel() : level_(kInfinite) {}
    static constexpr long long kInfinite = -1;
    long long level_;
};

enum class Strategy { stubborn, stealth };

inline const char* to_string(Strategy s)
{
    return s == Strategy::stubborn ? "stubborn" : "stealth";
}

// Per-cycle revenue ratio together with its expected block-count breakdown.
// ratio = (successful + unsuccessful_adversarial) / (successful + total_unsuccessful).
struct RevenueReport {
    double ratio = 0.0;
    double successful_blocks = 0.0;
    double unsuccessful_adversarial_blocks = 0.0;
    double total_unsuccessful_blocks = 0.0;

    double numerator() const { return successful_blocks + unsuccessful_adversarial_blocks; }
    double denominator() const { return successful_blocks + total_unsuccessful_blocks; }
};

// Outcome probabilities for the conflicting height-1 block pair in one cycle.
struct EventProbs {
    double double_spending = 0.0;
    double move_funds = 0.0;
    double service = 0.0;
};

struct CombinedRevenueParams {
    int k;
    double reward; // double-spend value in block-reward units

    CombinedRevenueParams(int k_, double reward_) : k(k_), reward(reward_)
    {
        if (k < 1) throw std::domain_error("confirmation depth k must be >= 1");
        if (!(reward >= 0.0)) throw std::domain_error("double-spend reward must be >= 0");
    }
};

// An upward level scan hit its cap before resolving. Carries the partial
// result so callers can report the unbounded-level candidacy.
class CapExceeded : public std::runtime_error {
public:
    CapExceeded(const std::string& what, long long cap, double best_ratio_at_cap,
                double infinite_ratio)
        : std::runtime_error(what),
          cap_(cap),
          best_ratio_at_cap_(best_ratio_at_cap),
          infinite_ratio_(infinite_ratio)
    {
    }

    long long cap() const { return cap_; }
    double best_ratio_at_cap() const { return best_ratio_at_cap_; }
    double infinite_ratio() const { return infinite_ratio_; }

private:
    long long cap_;
    double best_ratio_at_cap_;
    double infinite_ratio_;
};

} // namespace stubmine
