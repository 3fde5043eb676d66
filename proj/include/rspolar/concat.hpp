// Interleaved RS-polar concatenation: construction (fixed and rate-adaptive),
// encoding, and the joint successive decoders (SC, SC-GMD, SC-GMD-AML,
// SC-GMD-ML).
//
// Interleaver: RS codeword i, symbol j  <->  polar codeword j, info-bit group
// i. The binary image of a symbol is its t-bit little-endian value, so
// symbol<->bits conversion is a no-op on the integer. Polar codewords are
// transmitted in order j = 0..m-1, defining bit positions within the frame.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rspolar/bounds.hpp"
#include "rspolar/polar.hpp"
#include "rspolar/rs.hpp"

namespace rspolar {

enum class JointDecodeMode { Sc, ScGmd, ScGmdAml, ScGmdMl };

inline const char* to_string(JointDecodeMode m) {
    switch (m) {
        case JointDecodeMode::Sc: return "sc";
        case JointDecodeMode::ScGmd: return "sc-gmd";
        case JointDecodeMode::ScGmdAml: return "sc-gmd-aml";
        case JointDecodeMode::ScGmdMl: return "sc-gmd-ml";
    }
    return "?";
}

struct ConcatCode {
    PolarCode polar;
    const Field* field = nullptr;
    int t = 0;                  // symbol width in bits
    int r = 0;                  // number of outer RS codes = k/t
    int m = 0;                  // outer block length = 2^t - 1
    std::vector<RsCode> outer;  // one per group, radii tau_1..tau_r

    ConcatCode() = default;
    ConcatCode(PolarCode inner, const Field& f, std::vector<int> taus)
        : polar(std::move(inner)), field(&f), t(f.t()), m(f.order()) {
        if (polar.k() % t != 0)
            throw std::invalid_argument("ConcatCode: t must divide k");
        r = polar.k() / t;
        if (static_cast<int>(taus.size()) != r)
            throw std::invalid_argument("ConcatCode: need one tau per outer code (r = k/t)");
        outer.reserve(r);
        for (int tau : taus) outer.emplace_back(f, tau);
    }

    int n() const { return polar.n; }
    long total_bits() const { return static_cast<long>(n()) * m; }
    long message_bits() const {
        long sum = 0;
        for (const auto& c : outer) sum += c.kappa();
        return sum * t;
    }
    double total_rate() const { return static_cast<double>(message_bits()) / total_bits(); }
    std::vector<int> taus() const {
        std::vector<int> v;
        v.reserve(outer.size());
        for (const auto& c : outer) v.push_back(c.tau());
        return v;
    }
};

// Per-group symbol error probabilities Q_i = 1 - prod (1 - P_j) over the
// group's bit-channels, P taken at the sorted info set.
inline std::vector<double> symbol_error_profile(std::span<const double> bit_error_probs,
                                                std::span<const int> info_set, int t) {
    const int k = static_cast<int>(info_set.size());
    if (k % t != 0) throw std::invalid_argument("symbol_error_profile: t must divide k");
    std::vector<double> q(k / t);
    for (int g = 0; g < k / t; ++g) {
        double keep = 1.0;
        for (int b = 0; b < t; ++b)
            keep *= 1.0 - bit_error_probs[info_set[static_cast<size_t>(g) * t + b]];
        q[g] = 1.0 - keep;
    }
    return q;
}

struct InfeasibleDesign : std::runtime_error {
    int group;
    explicit InfeasibleDesign(int g, const std::string& why)
        : std::runtime_error("rate-adaptive design infeasible for group " + std::to_string(g) +
                             ": " + why),
          group(g) {}
};

// Smallest tau with C(m, tau+1) Q^(tau+1) < budget, or nullopt. The smallest
// admissible tau is 1 by default; allow_zero_tau additionally admits
// unprotected (rate-1) groups whose first-error term 15 Q already meets the
// budget, leaving the redundancy for the weak groups.
inline std::optional<int> min_tau_for_budget(double q, int m, double budget,
                                             bool allow_zero_tau = false) {
    if (budget <= 0.0) return std::nullopt;
    const double log2_budget = std::log2(budget);
    const int tau_max = (m - 1) / 2;
    for (int tau = allow_zero_tau ? 0 : 1; tau <= tau_max; ++tau) {
        double lhs = q <= 0.0 ? -kInf : log2_binomial(m, tau + 1) + (tau + 1) * std::log2(q);
        if (lhs < log2_budget) return tau;
    }
    return std::nullopt;
}

// Radii tau_i from the per-group failure criterion with per-group budget
// t*E/k; guarantees total frame error probability below E by union bound.
inline std::vector<int> rate_adaptive_design(std::span<const double> profile, int m, int t, int k,
                                             double target_fep, bool allow_zero_tau = false) {
    if (!(target_fep > 0.0 && target_fep < 1.0))
        throw std::invalid_argument("rate_adaptive_design: target FEP must be in (0,1)");
    if (static_cast<int>(profile.size()) != k / t)
        throw std::invalid_argument("rate_adaptive_design: profile size != k/t");
    const double budget = static_cast<double>(t) * target_fep / k;
    std::vector<int> taus(profile.size());
    for (size_t g = 0; g < profile.size(); ++g) {
        auto tau = min_tau_for_budget(profile[g], m, budget, allow_zero_tau);
        if (!tau)
            throw InfeasibleDesign(static_cast<int>(g),
                                   "no tau <= (m-1)/2 meets the budget (Q = " +
                                       std::to_string(profile[g]) + ")");
        taus[g] = *tau;
    }
    return taus;
}

// Union bound sum C(m, tau_i + 1) Q_i^(tau_i + 1) over the groups.
inline double predicted_fep(std::span<const int> taus, std::span<const double> profile, int m) {
    if (taus.size() != profile.size())
        throw std::invalid_argument("predicted_fep: taus/profile size mismatch");
    double sum = 0.0;
    for (size_t g = 0; g < taus.size(); ++g) {
        if (profile[g] <= 0.0) continue;
        sum += std::exp2(log2_binomial(m, taus[g] + 1) + (taus[g] + 1) * std::log2(profile[g]));
    }
    return sum;
}

struct RateTargetedResult {
    ConcatCode code;
    double predicted_fep = 0.0;
    double achieved_rate = 0.0;
    double group_budget = 0.0; // per-group target probability the search settled on
};

// The fixed-total-rate construction: for each candidate k pick the best k
// bit-channels, then binary-search the per-group budget until the total rate
// lands within tolerance of the target; the k with the lowest predicted FEP
// wins.
inline RateTargetedResult rate_targeted_design(const BitChannelQuality& quality, int s, int t,
                                               double target_rate, std::span<const int> k_range,
                                               std::uint32_t field_poly = 0,
                                               double rate_tolerance = 0.005,
                                               bool allow_zero_tau = false) {
    const int n = 1 << s;
    const Field& f = Field::get(t, field_poly);
    const int m = f.order();
    const std::vector<double>& p = quality.values();
    if (static_cast<int>(p.size()) != n)
        throw std::invalid_argument("rate_targeted_design: quality vector size != n");

    std::optional<RateTargetedResult> best;
    for (int k : k_range) {
        if (k < t || k > n || k % t != 0) continue;
        auto info = select_info_set(p, k);
        auto profile = symbol_error_profile(p, info, t);
        const int r = k / t;

        auto taus_at = [&](double budget) -> std::optional<std::vector<int>> {
            std::vector<int> taus(r);
            for (int g = 0; g < r; ++g) {
                auto tau = min_tau_for_budget(profile[g], m, budget, allow_zero_tau);
                if (!tau) return std::nullopt;
                taus[g] = *tau;
            }
            return taus;
        };
        auto rate_of = [&](const std::vector<int>& taus) {
            long bits = 0;
            for (int tau : taus) bits += m - 2 * tau;
            return static_cast<double>(bits) * t / (static_cast<double>(n) * m);
        };

        // rate is nondecreasing in the budget; bisect in the log domain
        double lo = -60.0, hi = 0.0; // log2 budget
        auto hi_taus = taus_at(std::exp2(hi));
        if (!hi_taus || rate_of(*hi_taus) < target_rate - rate_tolerance * target_rate)
            continue; // even the loosest protection cannot reach the rate
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi);
            auto taus = taus_at(std::exp2(mid));
            if (taus && rate_of(*taus) >= target_rate)
                hi = mid;
            else
                lo = mid;
        }
        // candidates bracketing the target from above and below
        for (double lb : {hi, lo}) {
            auto taus = taus_at(std::exp2(lb));
            if (!taus) continue;
            double rate = rate_of(*taus);
            if (std::fabs(rate - target_rate) > rate_tolerance * target_rate) continue;
            double fep = predicted_fep(*taus, profile, m);
            if (!best || fep < best->predicted_fep) {
                PolarCode inner(s, info);
                inner.quality = quality;
                RateTargetedResult res;
                res.code = ConcatCode(std::move(inner), f, *taus);
                res.predicted_fep = fep;
                res.achieved_rate = rate;
                res.group_budget = std::exp2(lb);
                best = std::move(res);
            }
        }
    }
    if (!best)
        throw std::runtime_error("rate_targeted_design: no k in range meets the rate target");
    return std::move(*best);
}

// --- encoding -------------------------------------------------------------------

// Message layout: group 0's kappa_0 symbols (t bits each, little-endian),
// then group 1's, and so on.
inline std::vector<std::uint8_t> concat_encode(const ConcatCode& code,
                                               std::span<const std::uint8_t> message) {
    if (static_cast<long>(message.size()) != code.message_bits())
        throw std::invalid_argument("concat_encode: message length != sum(kappa_i) * t");
    const int t = code.t, m = code.m, r = code.r;
    // outer encode
    std::vector<std::vector<gf_elem>> words(r);
    size_t pos = 0;
    for (int i = 0; i < r; ++i) {
        std::vector<gf_elem> msg(code.outer[i].kappa());
        for (auto& sym : msg) {
            gf_elem v = 0;
            for (int b = 0; b < t; ++b) v |= static_cast<gf_elem>(message[pos++]) << b;
            sym = v;
        }
        words[i] = code.outer[i].encode(msg);
    }
    // interleave and inner encode
    std::vector<std::uint8_t> frame(code.total_bits());
    std::vector<std::uint8_t> info(code.polar.k());
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < r; ++i)
            for (int b = 0; b < t; ++b)
                info[static_cast<size_t>(i) * t + b] = (words[i][j] >> b) & 1;
        auto x = polar_encode(code.polar, info);
        std::copy(x.begin(), x.end(), frame.begin() + static_cast<size_t>(j) * code.n());
    }
    return frame;
}

// --- joint decoding ---------------------------------------------------------------

struct JointDecodeResult {
    std::vector<std::uint8_t> message;            // decoded message bits
    std::vector<std::uint8_t> group_failed;       // per-group outer decode failure flag
    std::vector<std::vector<gf_elem>> words;      // final outer words, r x m
};

// Successive decoding of the concatenated code: per group, all m inner
// decoders advance one sub-block, the outer decoder corrects it, and the
// corrected bits are written back before the recursion continues. A failed
// outer decode keeps the SC decisions and flags the group.
inline JointDecodeResult joint_decode(const ConcatCode& code, JointDecodeMode mode,
                                      std::span<const double> frame_llrs) {
    if (static_cast<long>(frame_llrs.size()) != code.total_bits())
        throw std::invalid_argument("joint_decode: soft value count != n*m");
    const int t = code.t, m = code.m, r = code.r, n = code.n();
    const int q = 1 << t;

    std::vector<ScDecoder> dec;
    dec.reserve(m);
    for (int j = 0; j < m; ++j)
        dec.emplace_back(code.polar, frame_llrs.subspan(static_cast<size_t>(j) * n, n));

    JointDecodeResult out;
    out.group_failed.assign(r, 0);
    out.words.resize(r);
    std::vector<std::uint8_t> corrected(t);

    for (int g = 0; g < r; ++g) {
        SoftSymbolWord word;
        word.symbols.resize(m);
        word.reliabilities.assign(m, 1.0);
        word.erased.assign(m, 0);
        if (mode == JointDecodeMode::ScGmdAml || mode == JointDecodeMode::ScGmdMl)
            word.symbol_probs.assign(m, std::vector<double>(q, 0.0));

        for (int j = 0; j < m; ++j) {
            auto gr = dec[j].decode_group(g, t);
            gf_elem sym = 0;
            bool erased = false;
            double rel = 1.0;
            for (int b = 0; b < t; ++b) {
                sym |= static_cast<gf_elem>(gr.bits[b]) << b;
                if (gr.soft[b] == 0.0) erased = true;
                rel *= llr_bit_prob(gr.soft[b], gr.bits[b]);
            }
            word.symbols[j] = sym;
            word.erased[j] = erased ? 1 : 0;
            switch (mode) {
                case JointDecodeMode::Sc:
                    break;
                case JointDecodeMode::ScGmd:
                    word.reliabilities[j] = erased ? 0.0 : rel;
                    break;
                case JointDecodeMode::ScGmdAml: {
                    // independence approximation across the group's bits
                    for (int v = 0; v < q; ++v) {
                        double pv = 1.0;
                        for (int b = 0; b < t; ++b)
                            pv *= llr_bit_prob(gr.soft[b], (v >> b) & 1);
                        word.symbol_probs[j][v] = pv;
                    }
                    word.reliabilities[j] = erased ? 0.0 : rel;
                    break;
                }
                case JointDecodeMode::ScGmdMl: {
                    auto probs = dec[j].symbol_soft_output(g, t);
                    word.symbol_probs[j] = probs;
                    int arg = static_cast<int>(std::max_element(probs.begin(), probs.end()) -
                                               probs.begin());
                    word.symbols[j] = static_cast<gf_elem>(arg);
                    word.reliabilities[j] = erased ? 0.0 : probs[arg];
                    break;
                }
            }
        }

        std::optional<std::vector<gf_elem>> decoded;
        if (mode == JointDecodeMode::Sc) {
            decoded = code.outer[g].bm_decode(word.symbols, word.erased);
        } else {
            auto list = gmd_decode(code.outer[g], word);
            PickMetric metric = mode == JointDecodeMode::ScGmd ? PickMetric::Hamming
                                                               : PickMetric::ProductReliability;
            decoded = pick_candidate(list, word, metric);
        }

        if (decoded) {
            for (int j = 0; j < m; ++j) {
                for (int b = 0; b < t; ++b) corrected[b] = ((*decoded)[j] >> b) & 1;
                dec[j].set_group_decision(g, corrected);
            }
            out.words[g] = std::move(*decoded);
        } else {
            out.group_failed[g] = 1;
            for (int j = 0; j < m; ++j) {
                // keep the SC decisions: the tentative symbol, not the ML argmax
                gf_elem sym = 0;
                for (int b = 0; b < t; ++b) {
                    int idx = code.polar.info_set[static_cast<size_t>(g) * t + b];
                    std::uint8_t bit = dec[j].decisions()[idx];
                    corrected[b] = bit;
                    sym |= static_cast<gf_elem>(bit) << b;
                }
                dec[j].set_group_decision(g, corrected);
                word.symbols[j] = sym;
            }
            out.words[g] = word.symbols;
        }
    }

    out.message.reserve(code.message_bits());
    for (int g = 0; g < r; ++g)
        for (int j = 0; j < code.outer[g].kappa(); ++j)
            for (int b = 0; b < t; ++b)
                out.message.push_back((out.words[g][j] >> b) & 1);
    return out;
}

} // namespace rspolar
