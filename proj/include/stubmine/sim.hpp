#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "stubmine/model.hpp"

namespace stubmine {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace detail

// Counter-mixed 64-bit generator. Cheap to construct, so every chunk of work
// gets its own independent stream derived from (seed, chunk).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

inline SplitMix64 chunk_stream(std::uint64_t seed, std::uint64_t chunk)
{
    return SplitMix64(detail::mix64(seed + detail::mix64(chunk + 1)));
}

enum class ForkStatus { irrelevant, relevant, active };
enum class CycleEvent { service, move_funds, double_spending, not_applicable };
enum class CycleEndKind { adopt, override_release };

// Chain-race bookkeeping within one attack cycle.
struct CycleState {
    long long a_len = 0;         // private chain height
    long long h_len = 0;         // public chain height
    long long common_prefix = 0; // adversarial prefix length shared by the public chain
    ForkStatus fork_status = ForkStatus::irrelevant;
};

struct CycleOutcome {
    long long adversary_blocks_to_offset = 0; // x_i
    long long honest_blocks_to_offset = 0;    // y_i
    CycleEvent event = CycleEvent::not_applicable;
    long long replaced_confirmed_blocks = 0;
    CycleEndKind end = CycleEndKind::adopt;
    CycleState final_state;
    bool truncated = false;
};

namespace detail {

// Event and bounty classification for the height-1 block pair. A cycle's
// double-spend bounty counts every k-deep honest block replaced by a
// clean-prefix release; once a matched block has entered the public prefix,
// only an already-confirmed height-1 block evicted at the end still counts.
inline void classify_outcome(CycleOutcome& out, const CycleState& st, int k, bool b_confirmed,
                             bool switched)
{
    if (st.h_len < 1) { // no honest block was ever mined at height 1
        out.event = CycleEvent::not_applicable;
        out.replaced_confirmed_blocks = 0;
        return;
    }
    const bool b_in_offset = out.end == CycleEndKind::adopt && st.common_prefix == 0;
    if (b_in_offset) {
        out.event = CycleEvent::service;
    } else if (b_confirmed) {
        out.event = CycleEvent::double_spending;
    } else {
        out.event = CycleEvent::move_funds;
    }
    if (out.end == CycleEndKind::override_release && !switched) {
        out.replaced_confirmed_blocks = std::max<long long>(0, st.h_len - k + 1);
    } else if (b_confirmed && !b_in_offset) {
        out.replaced_confirmed_blocks = 1;
    } else {
        out.replaced_confirmed_blocks = 0;
    }
}

} // namespace detail

// One attack cycle of depth-L withholding. Every honest arrival at a height
// the adversary already holds privately (below the level) is matched; the
// next honest block then mines on the released branch with probability gamma,
// pulling the shared prefix up to the match height. The cycle ends with adopt
// when the public chain leads by one, or with a release once the private
// chain has reached the level and its lead shrinks to one.
template <class Rng>
CycleOutcome run_cycle_stubborn(const ModelParams& p, StubbornLevel level, int k, Rng& rng,
                                long long max_arrivals = 1'000'000)
{
    if (k < 1) throw std::domain_error("run_cycle: k must be >= 1");
    const long long cap_level =
        level.is_infinite() ? std::numeric_limits<long long>::max() : level.value();
    CycleState st;
    CycleOutcome out;
    bool b_confirmed = false;
    bool switched = false;
    long long arrivals = 0;
    for (;;) {
        if (st.a_len + 1 == st.h_len) { // adopt
            out.end = CycleEndKind::adopt;
            out.adversary_blocks_to_offset = st.common_prefix;
            out.honest_blocks_to_offset = st.h_len - st.common_prefix;
            break;
        }
        if (st.a_len == st.h_len + 1 && st.a_len >= cap_level) { // override
            out.end = CycleEndKind::override_release;
            out.adversary_blocks_to_offset = st.a_len;
            out.honest_blocks_to_offset = 0;
            break;
        }
        if (arrivals++ >= max_arrivals) { // runaway guard for the unbounded level
            out.truncated = true;
            out.end = CycleEndKind::adopt;
            out.adversary_blocks_to_offset = st.common_prefix;
            out.honest_blocks_to_offset = st.h_len - st.common_prefix;
            break;
        }
        if (rng.uniform() < p.alpha) {
            st.a_len += 1; // fork status persists through private extensions
        } else {
            if (st.fork_status == ForkStatus::active && rng.uniform() < p.gamma) {
                st.common_prefix = st.h_len; // new honest block rides the released branch
                switched = true;
            }
            st.h_len += 1;
            if (st.h_len >= k && st.common_prefix == 0) b_confirmed = true;
            st.fork_status = (st.a_len >= st.h_len && st.a_len < cap_level)
                                 ? ForkStatus::active   // matched immediately
                                 : ForkStatus::relevant;
        }
    }
    out.final_state = st;
    detail::classify_outcome(out, st, k, b_confirmed, switched);
    return out;
}

// Stealth variant: no matching until the race ties one short of the level.
// That single match creates an equal public fork which the next arrival
// settles three ways: a private block wins it, an honest block lands on the
// released branch (probability gamma), or the honest chain prevails.
template <class Rng>
CycleOutcome run_cycle_stealth(const ModelParams& p, StubbornLevel level, int k, Rng& rng,
                               long long max_arrivals = 1'000'000)
{
    if (k < 1) throw std::domain_error("run_cycle: k must be >= 1");
    const long long cap_level =
        level.is_infinite() ? std::numeric_limits<long long>::max() : level.value();
    CycleState st;
    CycleOutcome out;
    bool b_confirmed = false;
    long long arrivals = 0;
    for (;;) {
        if (st.a_len + 1 == st.h_len) {
            out.end = CycleEndKind::adopt;
            out.adversary_blocks_to_offset = st.common_prefix;
            out.honest_blocks_to_offset = st.h_len - st.common_prefix;
            break;
        }
        if (st.a_len == st.h_len + 1 && st.a_len >= cap_level) {
            out.end = CycleEndKind::override_release;
            out.adversary_blocks_to_offset = st.a_len;
            out.honest_blocks_to_offset = 0;
            break;
        }
        if (arrivals++ >= max_arrivals) {
            out.truncated = true;
            out.end = CycleEndKind::adopt;
            out.adversary_blocks_to_offset = st.common_prefix;
            out.honest_blocks_to_offset = st.h_len - st.common_prefix;
            break;
        }
        if (!level.is_infinite() && cap_level >= 2 && st.a_len == cap_level - 1 &&
            st.h_len == cap_level - 1) {
            // matched equal fork; the next block settles the cycle
            st.fork_status = ForkStatus::active;
            const double r = rng.uniform();
            if (r < p.alpha) {
                st.a_len += 1; // release wins via the override check above
                continue;
            }
            if (r < p.alpha + p.gamma * p.beta()) {
                // honest block on the released branch: the private chain plus
                // one honest block becomes the offset
                st.common_prefix = st.a_len;
                st.h_len = st.a_len + 1;
                out.end = CycleEndKind::adopt;
                out.adversary_blocks_to_offset = st.common_prefix;
                out.honest_blocks_to_offset = 1;
                break;
            }
            st.h_len += 1; // honest chain prevails: adopt fires above
            if (st.h_len >= k && st.common_prefix == 0) b_confirmed = true;
            continue;
        }
        if (rng.uniform() < p.alpha) {
            st.a_len += 1;
        } else {
            st.h_len += 1;
            if (st.h_len >= k && st.common_prefix == 0) b_confirmed = true;
        }
    }
    out.final_state = st;
    detail::classify_outcome(out, st, k, b_confirmed, st.common_prefix != 0);
    return out;
}

inline constexpr int kBatchCount = 100;
inline constexpr long long kChunkCycles = 16384;

// Bit-exact aggregate tallies of a simulation run. All fields are integer
// counts, so merging is commutative and the result is invariant to worker
// count and scheduling.
struct SimTallies {
    std::uint64_t cycles = 0;
    std::uint64_t adversary_blocks = 0;
    std::uint64_t honest_blocks = 0;
    std::uint64_t replaced_blocks = 0;
    std::uint64_t double_spending = 0;
    std::uint64_t move_funds = 0;
    std::uint64_t service = 0;
    std::uint64_t not_applicable = 0;
    std::uint64_t truncated = 0;

    struct Batch {
        std::uint64_t adversary = 0;
        std::uint64_t total = 0;
        std::uint64_t replaced = 0;
        friend bool operator==(const Batch&, const Batch&) = default;
    };
    std::array<Batch, kBatchCount> batches{};

    void merge(const SimTallies& o)
    {
        cycles += o.cycles;
        adversary_blocks += o.adversary_blocks;
        honest_blocks += o.honest_blocks;
        replaced_blocks += o.replaced_blocks;
        double_spending += o.double_spending;
        move_funds += o.move_funds;
        service += o.service;
        not_applicable += o.not_applicable;
        truncated += o.truncated;
        for (int b = 0; b < kBatchCount; ++b) {
            batches[b].adversary += o.batches[b].adversary;
            batches[b].total += o.batches[b].total;
            batches[b].replaced += o.batches[b].replaced;
        }
    }

    friend bool operator==(const SimTallies&, const SimTallies&) = default;
};

struct SimConfig {
    ModelParams params;
    Strategy strategy = Strategy::stubborn;
    StubbornLevel level = StubbornLevel(1);
    int k = 6;
    long long cycles = 1;
    std::uint64_t seed = 0;
    int workers = 1;
    long long max_arrivals = 1'000'000;
};

// Runs the configured number of i.i.d. cycles. Work is split into fixed-size
// chunks, each with its own (seed, chunk)-derived stream; tallies are summed
// as integers, so the result is identical for any worker count.
inline SimTallies run_cycles(const SimConfig& cfg)
{
    if (cfg.cycles < 1) throw std::invalid_argument("run_cycles: cycles must be >= 1");
    if (cfg.workers < 1) throw std::invalid_argument("run_cycles: workers must be >= 1");
    const long long n_chunks = (cfg.cycles + kChunkCycles - 1) / kChunkCycles;
    const int workers = static_cast<int>(std::min<long long>(cfg.workers, n_chunks));

    std::atomic<long long> next_chunk{0};
    std::vector<SimTallies> partial(static_cast<std::size_t>(workers));

    auto work = [&](int w) {
        SimTallies& t = partial[static_cast<std::size_t>(w)];
        for (;;) {
            const long long c = next_chunk.fetch_add(1, std::memory_order_relaxed);
            if (c >= n_chunks) break;
            SplitMix64 rng = chunk_stream(cfg.seed, static_cast<std::uint64_t>(c));
            const long long lo = c * kChunkCycles;
            const long long hi = std::min(cfg.cycles, lo + kChunkCycles);
            for (long long i = lo; i < hi; ++i) {
                const CycleOutcome oc =
                    cfg.strategy == Strategy::stubborn
                        ? run_cycle_stubborn(cfg.params, cfg.level, cfg.k, rng,
                                             cfg.max_arrivals)
                        : run_cycle_stealth(cfg.params, cfg.level, cfg.k, rng,
                                            cfg.max_arrivals);
                t.cycles += 1;
                t.adversary_blocks += static_cast<std::uint64_t>(oc.adversary_blocks_to_offset);
                t.honest_blocks += static_cast<std::uint64_t>(oc.honest_blocks_to_offset);
                t.replaced_blocks += static_cast<std::uint64_t>(oc.replaced_confirmed_blocks);
                switch (oc.event) {
                case CycleEvent::double_spending: t.double_spending += 1; break;
                case CycleEvent::move_funds: t.move_funds += 1; break;
                case CycleEvent::service: t.service += 1; break;
                case CycleEvent::not_applicable: t.not_applicable += 1; break;
                }
                if (oc.truncated) t.truncated += 1;
                const int b = static_cast<int>(i * kBatchCount / cfg.cycles);
                auto& batch = t.batches[static_cast<std::size_t>(b)];
                batch.adversary += static_cast<std::uint64_t>(oc.adversary_blocks_to_offset);
                batch.total += static_cast<std::uint64_t>(oc.adversary_blocks_to_offset +
                                                          oc.honest_blocks_to_offset);
                batch.replaced += static_cast<std::uint64_t>(oc.replaced_confirmed_blocks);
            }
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }

    SimTallies total;
    for (const auto& t : partial) total.merge(t);
    return total;
}

// Monte Carlo point estimate. Reproducible bit-exactly for a fixed seed and
// cycle count regardless of worker count.
struct SimEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long long cycles = 0;
    std::uint64_t seed = 0;
};

namespace detail {

// Ratio-of-sums estimator (adversary + reward * replaced) / (adversary +
// honest), with dispersion from batch means over the index-partitioned
// batches. Batches are equal cycle-index ranges, so the estimate does not
// depend on scheduling.
inline SimEstimate ratio_estimate(const SimTallies& t, double reward, std::uint64_t seed)
{
    SimEstimate est;
    est.cycles = static_cast<long long>(t.cycles);
    est.seed = seed;
    const double den = static_cast<double>(t.adversary_blocks + t.honest_blocks);
    if (den <= 0.0) return est;
    est.mean = (static_cast<double>(t.adversary_blocks) +
                reward * static_cast<double>(t.replaced_blocks)) /
               den;
    double sum = 0.0, sum_sq = 0.0;
    int used = 0;
    for (const auto& b : t.batches) {
        if (b.total == 0) continue;
        const double r = (static_cast<double>(b.adversary) +
                          reward * static_cast<double>(b.replaced)) /
                         static_cast<double>(b.total);
        sum += r;
        sum_sq += r * r;
        ++used;
    }
    if (used >= 2) {
        const double mean_b = sum / used;
        const double var = std::max(0.0, (sum_sq - used * mean_b * mean_b) / (used - 1));
        est.std_error = std::sqrt(var / used);
    }
    return est;
}

inline SimEstimate proportion_estimate(std::uint64_t count, std::uint64_t cycles,
                                       std::uint64_t seed)
{
    SimEstimate est;
    est.cycles = static_cast<long long>(cycles);
    est.seed = seed;
    if (cycles == 0) return est;
    const double ph = static_cast<double>(count) / static_cast<double>(cycles);
    est.mean = ph;
    est.std_error = std::sqrt(ph * (1.0 - ph) / static_cast<double>(cycles));
    return est;
}

} // namespace detail

inline SimEstimate estimate_revenue(const SimConfig& cfg)
{
    return detail::ratio_estimate(run_cycles(cfg), 0.0, cfg.seed);
}

// Combined-reward estimate; meaningful only at level = k + 1, where the
// analytic combined ratio is defined.
inline SimEstimate estimate_combined(const SimConfig& cfg, double reward)
{
    if (cfg.level.is_infinite() || cfg.level.value() != cfg.k + 1) {
        throw std::invalid_argument("combined-reward estimation requires level = k + 1");
    }
    if (!(reward >= 0.0)) throw std::invalid_argument("reward must be >= 0");
    return detail::ratio_estimate(run_cycles(cfg), reward, cfg.seed);
}

struct EventEstimates {
    SimEstimate double_spending;
    SimEstimate move_funds;
    SimEstimate service;
};

inline EventEstimates estimate_events(const SimConfig& cfg)
{
    const SimTallies t = run_cycles(cfg);
    return EventEstimates{detail::proportion_estimate(t.double_spending, t.cycles, cfg.seed),
                          detail::proportion_estimate(t.move_funds, t.cycles, cfg.seed),
                          detail::proportion_estimate(t.service, t.cycles, cfg.seed)};
}

} // namespace stubmine
