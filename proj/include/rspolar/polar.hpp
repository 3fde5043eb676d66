// Polar code construction, encoding and successive cancellation decoding,
// including stepwise group decoding with external corrections and exact
// per-symbol soft output.
//
// Index convention: bit-channel indices (construction z/p vectors, info_set,
// decode order) follow the successive cancellation recursion, i.e. the
// encoder is x = u R G^(x s) with R the bit-reversal permutation. The raw
// Kronecker transform x = u G^(x s) is exposed separately; the two encoders
// differ only by that fixed input relabeling. All indices are 0-based.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rspolar/channel.hpp"

namespace rspolar {

// --- soft-value arithmetic ---------------------------------------------------

// Check-node combine, the log-domain form of 2 atanh(tanh(a/2) tanh(b/2)).
// Erasures (0) and certainties (+/-inf) propagate exactly.
inline double llr_f(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    double sign = ((a < 0.0) != (b < 0.0)) ? -1.0 : 1.0;
    double aa = std::fabs(a), ab = std::fabs(b);
    if (std::isinf(aa)) return sign * ab;
    if (std::isinf(ab)) return sign * aa;
    double mn = std::min(aa, ab), mx = std::max(aa, ab);
    return sign * (mn + std::log1p(std::exp(-(aa + ab))) - std::log1p(std::exp(-(mx - mn))));
}

// Variable-node combine given the partial sum u of the already-decided branch.
// Conflicting certainties cancel to an erasure rather than producing NaN.
inline double llr_g(double a, double b, std::uint8_t u) {
    double au = u ? -a : a;
    if (std::isinf(au) && std::isinf(b) && (au < 0.0) != (b < 0.0)) return 0.0;
    return au + b;
}

inline std::uint8_t llr_hard(double v) { return v < 0.0 ? 1 : 0; } // tie (0) decides 0

// P(bit = b) for an LLR in log(P0/P1) form, assuming a uniform prior.
inline double llr_bit_prob(double v, std::uint8_t b) {
    double x = b ? -v : v;
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    return 1.0 / (1.0 + std::exp(-x));
}

// --- construction -------------------------------------------------------------

inline int bit_reverse(int v, int bits) {
    int r = 0;
    for (int i = 0; i < bits; ++i) r |= ((v >> i) & 1) << (bits - 1 - i);
    return r;
}

// Exact Bhattacharyya recursion for the BEC: each level expands z into the
// adjacent pair (2z - z^2, z^2), indexed in decode order.
inline std::vector<double> bec_bit_channels(int s, double design_erasure_prob) {
    if (s < 1) throw std::invalid_argument("bec_bit_channels: s must be >= 1");
    if (!(design_erasure_prob > 0.0 && design_erasure_prob < 1.0))
        throw std::invalid_argument("bec_bit_channels: design erasure probability must be in (0,1)");
    std::vector<double> z{design_erasure_prob};
    for (int level = 0; level < s; ++level) {
        std::vector<double> next(z.size() * 2);
        for (size_t i = 0; i < z.size(); ++i) {
            next[2 * i] = 2.0 * z[i] - z[i] * z[i];
            next[2 * i + 1] = z[i] * z[i];
        }
        z = std::move(next);
    }
    return z;
}

// Indices of the k most reliable bit-channels (smallest value), sorted
// ascending; ties broken toward the smaller index.
inline std::vector<int> select_info_set(std::span<const double> values, int k) {
    const int n = static_cast<int>(values.size());
    if (k < 0 || k > n) throw std::invalid_argument("select_info_set: k out of range");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values[a] < values[b]; });
    std::vector<int> info(order.begin(), order.begin() + k);
    std::sort(info.begin(), info.end());
    return info;
}

struct BitChannelQuality {
    std::vector<double> z;  // Bhattacharyya parameters (exact on the BEC)
    std::vector<double> p;  // genie-aided bit error estimates
    long trials = 0;

    const std::vector<double>& values() const {
        if (!p.empty()) return p;
        if (!z.empty()) return z;
        throw std::logic_error("BitChannelQuality: neither z nor p populated");
    }
};

struct PolarCode {
    int s = 0;
    int n = 0;
    std::vector<int> info_set; // sorted, decode-order indices
    BitChannelQuality quality;

    PolarCode() = default;
    PolarCode(int s_, std::vector<int> info) : s(s_), n(1 << s_), info_set(std::move(info)) {
        validate();
    }

    int k() const { return static_cast<int>(info_set.size()); }
    double rate() const { return static_cast<double>(k()) / n; }

    void validate() const {
        if (s < 1 || s > 30) throw std::invalid_argument("PolarCode: s out of range");
        if (n != (1 << s)) throw std::invalid_argument("PolarCode: n != 2^s");
        if (info_set.empty()) throw std::invalid_argument("PolarCode: empty info set");
        int prev = -1;
        for (int idx : info_set) {
            if (idx <= prev) throw std::invalid_argument("PolarCode: info_set must be strictly increasing");
            if (idx < 0 || idx >= n) throw std::invalid_argument("PolarCode: info_set index out of range");
            prev = idx;
        }
    }
};

// In-place Kronecker transform x = u G^(x s), natural index order.
inline void polar_transform_inplace(std::span<std::uint8_t> u) {
    const size_t n = u.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("polar_transform: length must be a power of two");
    for (size_t inc = 1; inc < n; inc <<= 1)
        for (size_t j = 0; j < inc; ++j)
            for (size_t i = j; i < n; i += 2 * inc)
                u[i] ^= u[i + inc];
}

inline std::vector<std::uint8_t> polar_transform(std::span<const std::uint8_t> u) {
    std::vector<std::uint8_t> x(u.begin(), u.end());
    polar_transform_inplace(x);
    return x;
}

// Scatter info bits into the decode-order input vector, relabel through the
// bit reversal and run the transform.
inline std::vector<std::uint8_t> polar_encode(const PolarCode& code,
                                              std::span<const std::uint8_t> info_bits) {
    if (static_cast<int>(info_bits.size()) != code.k())
        throw std::invalid_argument("polar_encode: info bit count != k");
    std::vector<std::uint8_t> u(code.n, 0);
    for (int i = 0; i < code.k(); ++i) {
        int idx = code.info_set[i];
        u[bit_reverse(idx, code.s)] = info_bits[i];
    }
    polar_transform_inplace(u);
    return u;
}

// --- successive cancellation decoder ------------------------------------------

// Single-codeword SC trellis. Level L in [0,s] holds 2^(s-L) soft entries and
// 2^(s-L+1) partial-sum slots; level 0 is the channel, level s the decision.
// Supports plain full decoding, genie-aided runs, and stepwise group decoding
// where an outer decoder may replace the bits of the last group before the
// recursion continues. Single-owner, not thread safe.
class ScDecoder {
public:
    ScDecoder(const PolarCode& code, std::span<const double> channel_llrs)
        : code_(&code), s_(code.s), n_(code.n) {
        if (static_cast<int>(channel_llrs.size()) != n_)
            throw std::invalid_argument("ScDecoder: channel LLR count != n");
        llr_off_.resize(s_ + 1);
        c_off_.resize(s_ + 1);
        size_t lo = 0, co = 0;
        for (int lev = 0; lev <= s_; ++lev) {
            llr_off_[lev] = lo;
            c_off_[lev] = co;
            lo += size_t(1) << (s_ - lev);
            co += size_t(2) << (s_ - lev);
        }
        llr_.assign(lo, 0.0);
        c_.assign(co, 0);
        std::copy(channel_llrs.begin(), channel_llrs.end(), llr_.begin() + llr_off_[0]);
        frozen_.assign(n_, 1);
        for (int idx : code.info_set) frozen_[idx] = 0;
        decisions_.assign(n_, 0);
        soft_.assign(n_, 0.0);
    }

    const PolarCode& code() const { return *code_; }
    int phase() const { return phase_; }

    // Decision-time soft value of every input bit (valid once its phase ran).
    const std::vector<double>& soft_values() const { return soft_; }
    const std::vector<std::uint8_t>& decisions() const { return decisions_; }

    struct DecodeResult {
        std::vector<std::uint8_t> u;       // all n input decisions
        std::vector<std::uint8_t> info;    // decisions at the info set
        std::vector<double> info_soft;     // decision-time soft values at the info set
    };

    // Plain SC pass over all remaining phases.
    DecodeResult decode_all() {
        while (phase_ < n_) step(no_force);
        DecodeResult r;
        r.u = decisions_;
        r.info.reserve(code_->k());
        r.info_soft.reserve(code_->k());
        for (int idx : code_->info_set) {
            r.info.push_back(decisions_[idx]);
            r.info_soft.push_back(soft_[idx]);
        }
        return r;
    }

    // Genie-aided pass: every decision is compared against the true input and
    // then forced to it; wrong[i] records the comparison.
    void genie_decode(std::span<const std::uint8_t> true_u, std::span<std::uint8_t> wrong) {
        if (static_cast<int>(true_u.size()) != n_ || static_cast<int>(wrong.size()) != n_)
            throw std::invalid_argument("genie_decode: need n true bits");
        while (phase_ < n_) {
            int ph = phase_;
            double v = compute_llr(ph);
            wrong[ph] = llr_hard(v) != true_u[ph] ? 1 : 0;
            commit(ph, true_u[ph], v);
        }
    }

    struct GroupResult {
        std::vector<std::uint8_t> bits;  // tentative info-bit decisions of the group
        std::vector<double> soft;        // their decision-time soft values
    };

    // Decodes the info bits [g*t, (g+1)*t) of the info sequence; frozen phases
    // passed on the way are decided as zero. The state is left tentatively
    // advanced; set_group_decision finalizes or replaces it.
    GroupResult decode_group(int g, int t) {
        check_group_call(g, t);
        if (tentative_)
            throw std::logic_error("decode_group: group already decoded; finalize it first");
        group_t_ = t;
        if (!snapshot_valid_) take_snapshot();
        GroupResult r;
        const int last_phase = code_->info_set[static_cast<size_t>(g + 1) * t - 1];
        while (phase_ <= last_phase) {
            int ph = phase_;
            double v = step(no_force);
            if (!frozen_[ph]) {
                r.bits.push_back(decisions_[ph]);
                r.soft.push_back(v);
            }
        }
        tentative_ = true;
        return r;
    }

    // Joint likelihood of each of the 2^t bit patterns of group g given the
    // channel output and the finalized prefix, normalized to sum 1. Pure
    // query: the decoder state is left exactly as found. The chosen pattern's
    // recursion state is reproduced by set_group_decision, which replays the
    // corresponding path from the group-start snapshot.
    //
    // The leading frozen phases and the first info bit's soft-value recursion
    // do not depend on the pattern, so they run once; the 2^t paths then
    // replay only the remainder, restoring just the trellis slices they
    // touched.
    std::vector<double> symbol_soft_output(int g, int t) {
        check_group_call(g, t);
        group_t_ = t;
        if (!snapshot_valid_) take_snapshot();
        const bool was_tentative = tentative_;
        if (was_tentative) capture_into(entry_snap_); // decoder already advanced past the group
        const int first_phase = code_->info_set[static_cast<size_t>(g) * t];
        const int last_phase = code_->info_set[static_cast<size_t>(g + 1) * t - 1];

        // shared head: frozen phases up to the first info bit, plus its LLR
        restore_dirty(snapshot_);
        int head_llr_dirty = dirty_llr_lev_, head_c_dirty = dirty_c_lev_;
        while (phase_ < first_phase) step(no_force);
        const double v0 = compute_llr(first_phase);
        head_llr_dirty = std::min(head_llr_dirty, dirty_llr_lev_);
        head_c_dirty = std::min(head_c_dirty, dirty_c_lev_);
        capture_into(head_snap_);
        const Snapshot& head = head_snap_;
        reset_dirty();

        const size_t npat = size_t(1) << t;
        std::vector<double> logp(npat, 0.0);
        for (size_t pat = 0; pat < npat; ++pat) {
            restore_dirty(head);
            double p0 = llr_bit_prob(v0, pat & 1); // group bit order matches the binary image
            double acc = p0 > 0.0 ? std::log(p0) : -kInf;
            commit(first_phase, pat & 1, v0);
            int bit_idx = 1;
            while (phase_ <= last_phase && acc != -kInf) {
                int ph = phase_;
                double v = compute_llr(ph);
                std::uint8_t b = 0;
                if (!frozen_[ph]) {
                    b = (pat >> bit_idx) & 1;
                    ++bit_idx;
                    double pb = llr_bit_prob(v, b);
                    acc += pb > 0.0 ? std::log(pb) : -kInf;
                }
                commit(ph, b, v);
            }
            logp[pat] = acc;
        }

        // unwind: back to the head, then to the group-start snapshot
        restore_dirty(head);
        dirty_llr_lev_ = head_llr_dirty;
        dirty_c_lev_ = head_c_dirty;
        restore_dirty(snapshot_);
        if (was_tentative) restore(entry_snap_);

        // normalize in the log domain
        double mx = *std::max_element(logp.begin(), logp.end());
        std::vector<double> probs(npat, 0.0);
        if (mx == -kInf) {
            std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(npat));
            return probs;
        }
        double sum = 0.0;
        for (size_t i = 0; i < npat; ++i) {
            probs[i] = std::exp(logp[i] - mx);
            sum += probs[i];
        }
        for (double& v : probs) v /= sum;
        return probs;
    }

    // Finalizes group g. If the corrected bits differ from the tentative
    // decisions, the decoder rolls back to the group-start snapshot and
    // replays the group with the corrected bits forced, leaving the recursion
    // state identical to a fresh run over that prefix.
    void set_group_decision(int g, std::span<const std::uint8_t> corrected) {
        if (g != group_ || !tentative_)
            throw std::logic_error("set_group_decision: group was not the last decoded group");
        const int t = group_t_;
        if (static_cast<int>(corrected.size()) != t)
            throw std::invalid_argument("set_group_decision: expected " + std::to_string(t) + " bits");
        bool same = true;
        for (int i = 0; i < t; ++i)
            if (decisions_[code_->info_set[static_cast<size_t>(g) * t + i]] != corrected[i]) {
                same = false;
                break;
            }
        if (!same) {
            restore(snapshot_);
            const int last_phase = code_->info_set[static_cast<size_t>(g + 1) * t - 1];
            int bit_idx = 0;
            while (phase_ <= last_phase) {
                if (!frozen_[phase_])
                    step(static_cast<int>(corrected[bit_idx++]));
                else
                    step(no_force);
            }
        }
        snapshot_valid_ = false;
        tentative_ = false;
        ++group_;
        // after the last group, run out the trailing frozen phases
        if (static_cast<size_t>(group_) * t >= static_cast<size_t>(code_->k()))
            while (phase_ < n_) step(no_force);
    }

private:
    static constexpr int no_force = -1;

    struct Snapshot {
        std::vector<double> llr;
        std::vector<std::uint8_t> c;
        std::vector<std::uint8_t> decisions;
        std::vector<double> soft;
        int phase = 0;
    };

    void check_group_call(int g, int t) const {
        if (t < 1 || code_->k() % t != 0)
            throw std::invalid_argument("group size must divide k");
        if (tentative_ && t != group_t_)
            throw std::invalid_argument("group size changed mid-group");
        if (g != group_)
            throw std::logic_error("groups must be decoded in order; expected group " +
                                   std::to_string(group_));
        if (static_cast<size_t>(g + 1) * t > static_cast<size_t>(code_->k()))
            throw std::invalid_argument("group index out of range");
    }

    void take_snapshot() {
        capture_into(snapshot_);
        snapshot_valid_ = true;
        reset_dirty(); // state == snapshot from here on
    }

    // assignments reuse the buffers' capacity, so this allocates only once
    void capture_into(Snapshot& snap) const {
        snap.llr = llr_;
        snap.c = c_;
        snap.decisions = decisions_;
        snap.soft = soft_;
        snap.phase = phase_;
    }

    void restore(const Snapshot& snap) {
        llr_ = snap.llr;
        c_ = snap.c;
        decisions_ = snap.decisions;
        soft_ = snap.soft;
        phase_ = snap.phase;
        reset_dirty();
    }

    // Restores only what has been touched since `snap` was the live state:
    // the trellis slices are contiguous per level, so two tail memcpys plus
    // the advanced phase range cover it. Keeps the 2^t path enumeration
    // cheap. Callers must ensure the dirty marks over-approximate the
    // difference to `snap`.
    void restore_dirty(const Snapshot& snap) {
        if (dirty_llr_lev_ <= s_) {
            size_t off = llr_off_[dirty_llr_lev_];
            std::memcpy(llr_.data() + off, snap.llr.data() + off,
                        (llr_.size() - off) * sizeof(double));
        }
        if (dirty_c_lev_ <= s_) {
            size_t off = c_off_[dirty_c_lev_];
            std::memcpy(c_.data() + off, snap.c.data() + off, c_.size() - off);
        }
        if (phase_ > snap.phase) {
            std::memcpy(decisions_.data() + snap.phase, snap.decisions.data() + snap.phase,
                        static_cast<size_t>(phase_ - snap.phase));
            std::memcpy(soft_.data() + snap.phase, snap.soft.data() + snap.phase,
                        static_cast<size_t>(phase_ - snap.phase) * sizeof(double));
        }
        phase_ = snap.phase;
        reset_dirty();
    }

    void reset_dirty() {
        dirty_llr_lev_ = s_ + 1;
        dirty_c_lev_ = s_ + 1;
    }

    double* llr_level(int lev) { return llr_.data() + llr_off_[lev]; }
    std::uint8_t* c_level(int lev) { return c_.data() + c_off_[lev]; }

    // Fills level `lev` for phase `ph`, recursing into the coarser level on
    // even phases (odd phases reuse it).
    void calc_level(int lev, int ph) {
        if (lev == 0) return;
        if ((ph & 1) == 0) calc_level(lev - 1, ph >> 1);
        dirty_llr_lev_ = std::min(dirty_llr_lev_, lev);
        const size_t half = size_t(1) << (s_ - lev);
        double* cur = llr_level(lev);
        const double* below = llr_level(lev - 1);
        if ((ph & 1) == 0) {
            for (size_t b = 0; b < half; ++b)
                cur[b] = llr_f(below[2 * b], below[2 * b + 1]);
        } else {
            const std::uint8_t* cs = c_level(lev);
            for (size_t b = 0; b < half; ++b)
                cur[b] = llr_g(below[2 * b], below[2 * b + 1], cs[2 * b]);
        }
    }

    void update_partial_sums(int lev, int ph) {
        const int psi = ph >> 1;
        dirty_c_lev_ = std::min(dirty_c_lev_, lev - 1);
        const size_t half = size_t(1) << (s_ - lev);
        std::uint8_t* cs = c_level(lev);
        std::uint8_t* below = c_level(lev - 1);
        const int slot = psi & 1;
        for (size_t b = 0; b < half; ++b) {
            below[4 * b + slot] = cs[2 * b] ^ cs[2 * b + 1];
            below[4 * b + 2 + slot] = cs[2 * b + 1];
        }
        if ((psi & 1) == 1 && lev > 1) update_partial_sums(lev - 1, psi);
    }

    double compute_llr(int ph) {
        calc_level(s_, ph);
        return llr_level(s_)[0];
    }

    void commit(int ph, std::uint8_t bit, double v) {
        soft_[ph] = v;
        decisions_[ph] = bit;
        dirty_c_lev_ = std::min(dirty_c_lev_, s_);
        c_level(s_)[ph & 1] = bit;
        if (ph & 1) update_partial_sums(s_, ph);
        ++phase_;
    }

    // Advances one phase; forced >= 0 overrides the info-bit decision.
    double step(int forced) {
        const int ph = phase_;
        double v = compute_llr(ph);
        std::uint8_t bit;
        if (frozen_[ph])
            bit = 0;
        else if (forced >= 0)
            bit = static_cast<std::uint8_t>(forced);
        else
            bit = llr_hard(v);
        commit(ph, bit, v);
        return v;
    }

    const PolarCode* code_;
    int s_, n_;
    std::vector<size_t> llr_off_, c_off_;
    std::vector<double> llr_;
    std::vector<std::uint8_t> c_;
    std::vector<std::uint8_t> frozen_;
    std::vector<std::uint8_t> decisions_;
    std::vector<double> soft_;
    int phase_ = 0;
    int group_ = 0;
    int group_t_ = 0;
    bool tentative_ = false;
    Snapshot snapshot_;
    Snapshot head_snap_, entry_snap_; // symbol_soft_output scratch
    bool snapshot_valid_ = false;
    int dirty_llr_lev_ = std::numeric_limits<int>::max();
    int dirty_c_lev_ = std::numeric_limits<int>::max();
};

inline ScDecoder::DecodeResult sc_decode(const PolarCode& code, std::span<const double> llrs) {
    ScDecoder dec(code, llrs);
    return dec.decode_all();
}

// --- rng streams ---------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Independent per-frame stream keyed by (seed, index): reproducible and
// worker-count invariant.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x1234567ull)));
}

// --- genie-aided bit-channel estimation ---------------------------------------

namespace detail {
inline void genie_trials(int s, const ChannelModel& channel, long first, long last,
                         std::uint64_t seed, std::vector<long>& counts) {
    const int n = 1 << s;
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    PolarCode full(s, all);
    std::vector<std::uint8_t> u(n), x(n), wrong(n);
    std::vector<double> soft(n);
    for (long trial = first; trial < last; ++trial) {
        auto rng = stream_rng(seed, static_cast<std::uint64_t>(trial));
        for (int i = 0; i < n; ++i) u[i] = static_cast<std::uint8_t>(rng() & 1);
        for (int i = 0; i < n; ++i) x[bit_reverse(i, s)] = u[i];
        polar_transform_inplace(x);
        channel.transmit_into(x, rng, soft);
        ScDecoder dec(full, soft);
        dec.genie_decode(u, wrong);
        for (int i = 0; i < n; ++i) counts[i] += wrong[i];
    }
}
} // namespace detail

// Monte Carlo estimate of the per-bit-channel error probability: uniform
// random inputs, full-rate transform, SC with all previous bits forced
// correct. Deterministic given the seed for any worker count (per-trial rng
// streams; count merging commutes).
inline BitChannelQuality mc_bitchannel_estimate(int s, const ChannelModel& channel, long trials,
                                                std::uint64_t seed, int workers = 1) {
    if (trials < 1) throw std::invalid_argument("mc_bitchannel_estimate: trials must be >= 1");
    const int n = 1 << s;
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    std::vector<long> counts(n, 0);
    if (workers == 1) {
        detail::genie_trials(s, channel, 0, trials, seed, counts);
    } else {
        std::vector<std::vector<long>> parts(workers, std::vector<long>(n, 0));
        std::vector<std::thread> pool;
        pool.reserve(workers);
        long chunk = (trials + workers - 1) / workers;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                long first = w * chunk, last = std::min(trials, (w + 1) * chunk);
                if (first < last) detail::genie_trials(s, channel, first, last, seed, parts[w]);
            });
        for (auto& th : pool) th.join();
        for (int w = 0; w < workers; ++w)
            for (int i = 0; i < n; ++i) counts[i] += parts[w][i];
    }
    BitChannelQuality q;
    q.trials = trials;
    q.p.resize(n);
    for (int i = 0; i < n; ++i)
        q.p[i] = static_cast<double>(counts[i]) / static_cast<double>(trials);
    return q;
}

} // namespace rspolar
