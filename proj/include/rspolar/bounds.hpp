// Closed-form performance bounds and parameterizations used to certify the
// construction and cross-check the Monte Carlo results. All bound arithmetic
// is carried in the log2 domain; clamped probabilities are reported together
// with the raw exponent, which carries the asymptotics.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rspolar/polar.hpp"

namespace rspolar {

inline double log2_binomial(int n, int k) {
    if (k < 0 || k > n) return -kInf;
    return (std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) / std::log(2.0);
}

struct Lemma1Bound {
    double exponent;     // log2 of the bound, m * (1 - n^(0.5-eps)(1-Ro)/2)
    double probability;  // 2^exponent clamped to [0,1]
    bool vacuous;        // exponent >= 0
};

// Frame-error upper bound 2^{-(n^(0.5-eps)(1-Ro)/2 - 1) m} for the uniform
// outer-rate concatenation.
inline Lemma1Bound lemma1_bound(double n, double m, double outer_rate, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("lemma1_bound: eps must be > 0");
    if (!(outer_rate > 0.0 && outer_rate < 1.0))
        throw std::invalid_argument("lemma1_bound: outer rate must be in (0,1)");
    double n_pow = std::exp2(std::log2(n) * (0.5 - eps));
    double exponent = -(n_pow * (1.0 - outer_rate) / 2.0 - 1.0) * m;
    Lemma1Bound b;
    b.exponent = exponent;
    b.vacuous = exponent >= 0.0;
    b.probability = b.vacuous ? 1.0 : std::exp2(exponent);
    return b;
}

struct Theorem1Params {
    double n_exact, m_exact, outer_rate;
    long n_rounded, m_rounded; // nearest powers of two
    bool feasible;             // outer_rate > 0
};

// The error-decay parameterization n = N^eps, m = N^(1-eps),
// Ro = 1 - 4 N^(-eps(0.5-eps)); substituted into lemma1_bound the raw
// exponent is exactly -N^(1-eps).
inline Theorem1Params theorem1_params(double total_length, double eps) {
    if (!(eps > 0.0 && eps < 0.5))
        throw std::invalid_argument("theorem1_params: eps must be in (0, 0.5)");
    double log2N = std::log2(total_length);
    Theorem1Params p;
    p.n_exact = std::exp2(log2N * eps);
    p.m_exact = std::exp2(log2N * (1.0 - eps));
    p.outer_rate = 1.0 - 4.0 * std::exp2(-log2N * eps * (0.5 - eps));
    p.n_rounded = 1L << static_cast<long>(std::lround(log2N * eps));
    p.m_rounded = 1L << static_cast<long>(std::lround(log2N * (1.0 - eps)));
    p.feasible = p.outer_rate > 0.0;
    return p;
}

// Union bound of the SC block error probability over the selected
// bit-channels: sum of their Bhattacharyya parameters, clamped at 1.
inline double union_bound(std::span<const double> z, std::span<const int> info_set) {
    double sum = 0.0;
    for (int idx : info_set) {
        if (idx < 0 || idx >= static_cast<int>(z.size()))
            throw std::invalid_argument("union_bound: info index out of range");
        sum += z[idx];
    }
    return std::min(sum, 1.0);
}

// Exact binomial tail sum_{i=r*tau+1}^{m} C(m,i) p^i (1-p)^(m-i): the
// optimistic lower bound where inner failures spread one symbol each,
// uniformly over the outer words.
inline double optimistic_lower_bound(int m, int r_tau, double pe) {
    if (m < 1) throw std::invalid_argument("optimistic_lower_bound: m must be >= 1");
    if (!(pe >= 0.0 && pe <= 1.0))
        throw std::invalid_argument("optimistic_lower_bound: Pe must be in [0,1]");
    if (r_tau >= m) return 0.0;
    if (pe == 0.0) return 0.0;
    if (pe == 1.0) return 1.0;
    double sum = 0.0;
    for (int i = r_tau + 1; i <= m; ++i) {
        double log2_term = log2_binomial(m, i) + i * std::log2(pe) + (m - i) * std::log2(1.0 - pe);
        sum += std::exp2(log2_term);
    }
    return std::min(sum, 1.0);
}

// Erasure-burst length that guarantees SC failure (probability >= 1/2):
// 2 sqrt(n) - 1 for even s, generalized through ceil(s/2) for odd s.
inline long burst_failure_threshold(long n) {
    if (n < 2 || (n & (n - 1)) != 0)
        throw std::invalid_argument("burst_failure_threshold: n must be a power of two >= 2");
    int s = 0;
    while ((1L << s) < n) ++s;
    int q = (s + 1) / 2;
    return 2 * (1L << q) - 1;
}

// Longest erasure burst the concatenation provably recovers: (d-2) n + 1.
inline long burst_recovery_limit(int min_distance, long n) {
    if (min_distance < 2)
        throw std::invalid_argument("burst_recovery_limit: outer distance must be >= 2");
    return (static_cast<long>(min_distance) - 2) * n + 1;
}

struct BoundReport {
    // echoed inputs
    double n = 0, m = 0, outer_rate = 0, eps = 0;
    std::optional<double> design_erasure;
    std::optional<double> inner_rate;
    std::optional<double> pe;
    // bounds
    std::optional<double> union_bound_value;
    std::optional<Lemma1Bound> lemma1;
    std::optional<Theorem1Params> theorem1;
    std::optional<double> lower_bound;
    std::optional<long> failure_threshold;
    std::optional<long> recovery_limit;
};

} // namespace rspolar
