// Reed-Solomon codec over GF(2^t): systematic encoder, Berlekamp-Massey
// errors-and-erasures bounded-distance decoder, GMD list decoder and
// candidate selection.
//
// Codeword position j in [0,m) holds the coefficient of x^(m-1-j), so the
// message occupies positions 0..kappa-1 and the parity sits at the end.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rspolar/gf.hpp"

namespace rspolar {

class RsCode {
public:
    RsCode(const Field& field, int tau)
        : field_(&field), m_(field.order()), tau_(tau), kappa_(m_ - 2 * tau) {
        if (tau < 0 || kappa_ < 1)
            throw std::invalid_argument("RsCode: need 0 <= tau <= (m-1)/2");
        // generator g(x) = prod_{i=1}^{2 tau} (x - alpha^i)
        generator_ = {1};
        for (int i = 1; i <= 2 * tau_; ++i)
            generator_ = poly_mul(field, generator_, Poly{field.alpha_pow(i), 1});
    }

    const Field& field() const { return *field_; }
    int m() const { return m_; }
    int tau() const { return tau_; }
    int kappa() const { return kappa_; }
    int min_distance() const { return 2 * tau_ + 1; }
    const Poly& generator() const { return generator_; }

    std::vector<gf_elem> encode(std::span<const gf_elem> message) const {
        if (static_cast<int>(message.size()) != kappa_)
            throw std::invalid_argument("RsCode::encode: message length != kappa");
        if (tau_ == 0) return {message.begin(), message.end()};
        // c(x) = M(x) x^(2 tau) + (M(x) x^(2 tau) mod g), M big-endian over positions
        Poly shifted(m_, 0);
        for (int j = 0; j < kappa_; ++j)
            shifted[m_ - 1 - j] = message[j];
        Poly rem = poly_mod(*field_, shifted, generator_);
        std::vector<gf_elem> word(m_, 0);
        for (int j = 0; j < kappa_; ++j) word[j] = message[j];
        for (int d = 0; d < 2 * tau_; ++d)
            word[m_ - 1 - d] = d < static_cast<int>(rem.size()) ? rem[d] : 0;
        return word;
    }

    std::vector<gf_elem> message_of(std::span<const gf_elem> codeword) const {
        return {codeword.begin(), codeword.begin() + kappa_};
    }

    // Syndromes S_i = c(alpha^i), i = 1..2 tau.
    std::vector<gf_elem> syndromes(std::span<const gf_elem> word) const {
        Poly coeffs(m_, 0);
        for (int j = 0; j < m_; ++j) coeffs[m_ - 1 - j] = word[j];
        std::vector<gf_elem> s(2 * tau_, 0);
        for (int i = 1; i <= 2 * tau_; ++i)
            s[i - 1] = poly_eval(*field_, coeffs, field_->alpha_pow(i));
        return s;
    }

    bool is_codeword(std::span<const gf_elem> word) const {
        auto s = syndromes(word);
        return std::all_of(s.begin(), s.end(), [](gf_elem v) { return v == 0; });
    }

    // Bounded-distance errors-and-erasures decoding. Succeeds whenever
    // 2*errors + erasures <= 2 tau; everything else returns nullopt.
    std::optional<std::vector<gf_elem>> bm_decode(std::span<const gf_elem> word,
                                                  std::span<const std::uint8_t> erased) const {
        if (static_cast<int>(word.size()) != m_)
            throw std::invalid_argument("RsCode::bm_decode: word length != m");
        const Field& f = *field_;
        std::vector<int> erase_pos;
        if (!erased.empty()) {
            if (static_cast<int>(erased.size()) != m_)
                throw std::invalid_argument("RsCode::bm_decode: erasure flag length != m");
            for (int j = 0; j < m_; ++j)
                if (erased[j]) erase_pos.push_back(j);
        }
        const int e = static_cast<int>(erase_pos.size());
        if (e > 2 * tau_) return std::nullopt;

        std::vector<gf_elem> s = syndromes(word);
        bool all_zero = std::all_of(s.begin(), s.end(), [](gf_elem v) { return v == 0; });
        if (all_zero && e == 0)
            return std::vector<gf_elem>(word.begin(), word.end());

        // Erasure locator Gamma(x) = prod (1 - X_j x), X_j = alpha^(m-1-j).
        Poly gamma{1};
        for (int j : erase_pos)
            gamma = poly_mul(f, gamma, Poly{1, f.alpha_pow(m_ - 1 - j)});

        // Modified syndromes Xi = S(x) Gamma(x) mod x^(2 tau). The error locator
        // is the shortest LFSR generating the tail Xi_{e+1}..Xi_{2 tau}, which
        // classic Berlekamp-Massey finds.
        Poly spoly(s.begin(), s.end());
        Poly xi = poly_mul(f, spoly, gamma);
        xi.resize(2 * tau_, 0);
        std::vector<gf_elem> tail(xi.begin() + e, xi.end());

        auto [lambda, lfsr_len] = berlekamp_massey(tail);
        const int nu = lfsr_len;
        if (poly_deg(lambda) != nu) return std::nullopt; // not a valid locator
        if (2 * nu + e > 2 * tau_) return std::nullopt;

        // Errata locator and evaluator: Omega = S Psi mod x^(2 tau).
        Poly psi = poly_mul(f, lambda, gamma);
        Poly omega = poly_mul(f, spoly, psi);
        omega.resize(2 * tau_, 0);
        poly_trim(omega);

        // Chien search: position j is errata iff psi(X_j^{-1}) == 0; Forney
        // magnitude Omega(X_j^{-1}) / Psi'(X_j^{-1}) with first root alpha^1.
        Poly psi_der = poly_derivative(psi);
        std::vector<gf_elem> corrected(word.begin(), word.end());
        int roots = 0;
        for (int j = 0; j < m_; ++j) {
            gf_elem xinv = f.alpha_pow(-(m_ - 1 - j));
            if (poly_eval(f, psi, xinv) != 0) continue;
            ++roots;
            gf_elem num = poly_eval(f, omega, xinv);
            gf_elem den = poly_eval(f, psi_der, xinv);
            if (den == 0) return std::nullopt;
            corrected[j] ^= f.div(num, den);
        }
        if (roots != poly_deg(psi)) return std::nullopt;
        if (!is_codeword(corrected)) return std::nullopt;
        return corrected;
    }

    std::optional<std::vector<gf_elem>> bm_decode(std::span<const gf_elem> word) const {
        return bm_decode(word, {});
    }

private:
    // Classic Berlekamp-Massey: shortest LFSR (lambda, L) with
    // sum_j lambda_j seq[k-j] = 0 for all k >= L, lambda_0 = 1.
    std::pair<Poly, int> berlekamp_massey(const std::vector<gf_elem>& seq) const {
        const Field& f = *field_;
        Poly lambda{1}, b{1};
        int L = 0, shift = 1;
        gf_elem bd = 1;
        for (size_t n = 0; n < seq.size(); ++n) {
            gf_elem delta = seq[n];
            for (int i = 1; i <= L && i < static_cast<int>(lambda.size()) &&
                            i <= static_cast<int>(n); ++i)
                delta ^= f.mul(lambda[i], seq[n - i]);
            if (delta == 0) {
                ++shift;
                continue;
            }
            gf_elem coef = f.div(delta, bd);
            if (2 * L <= static_cast<int>(n)) {
                Poly prev = lambda;
                lambda.resize(std::max(lambda.size(), b.size() + shift), 0);
                for (size_t i = 0; i < b.size(); ++i)
                    lambda[i + shift] ^= f.mul(coef, b[i]);
                L = static_cast<int>(n) + 1 - L;
                b = std::move(prev);
                bd = delta;
                shift = 1;
            } else {
                lambda.resize(std::max(lambda.size(), b.size() + shift), 0);
                for (size_t i = 0; i < b.size(); ++i)
                    lambda[i + shift] ^= f.mul(coef, b[i]);
                ++shift;
            }
        }
        poly_trim(lambda);
        if (lambda.empty()) lambda = {1};
        return {lambda, L};
    }

    const Field* field_;
    int m_, tau_, kappa_;
    Poly generator_;
};

// Hard decisions plus per-position confidence, as handed from the inner
// decoders to the outer one. Erased positions carry reliability 0. The
// optional symbol_probs table (m x 2^t) feeds the product metric; without it
// the metric falls back to the scalar reliabilities.
struct SoftSymbolWord {
    std::vector<gf_elem> symbols;
    std::vector<double> reliabilities;
    std::vector<std::uint8_t> erased;
    std::vector<std::vector<double>> symbol_probs;

    void validate(int m) const {
        if (static_cast<int>(symbols.size()) != m ||
            static_cast<int>(reliabilities.size()) != m ||
            static_cast<int>(erased.size()) != m)
            throw std::invalid_argument("SoftSymbolWord: sequences must all have length m");
    }
};

// GMD list decoding: for alpha in {0,2,...,d-1} erase the alpha least
// reliable positions (ties broken toward the lower index) and run the
// bounded-distance decoder; returns the deduplicated list of successes.
// List size is at most (d+1)/2.
inline std::vector<std::vector<gf_elem>> gmd_decode(const RsCode& code, const SoftSymbolWord& word) {
    word.validate(code.m());
    const int d = code.min_distance();
    std::vector<int> order(code.m());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return word.reliabilities[a] < word.reliabilities[b];
    });
    std::vector<std::vector<gf_elem>> list;
    std::vector<std::uint8_t> flags(code.m(), 0);
    for (int alpha = 0; alpha <= d - 1; alpha += 2) {
        std::fill(flags.begin(), flags.end(), 0);
        for (int i = 0; i < alpha; ++i) flags[order[i]] = 1;
        auto res = code.bm_decode(word.symbols, flags);
        if (res && std::find(list.begin(), list.end(), *res) == list.end())
            list.push_back(std::move(*res));
    }
    return list;
}

enum class PickMetric { Hamming, ProductReliability };

// Selects from a GMD candidate list; ties resolve to the lowest list index.
inline std::optional<std::vector<gf_elem>> pick_candidate(const std::vector<std::vector<gf_elem>>& list,
                                                          const SoftSymbolWord& word,
                                                          PickMetric metric) {
    if (list.empty()) return std::nullopt;
    const int m = static_cast<int>(word.symbols.size());
    size_t best = 0;
    if (metric == PickMetric::Hamming) {
        int best_dist = m + 1;
        for (size_t c = 0; c < list.size(); ++c) {
            int dist = 0;
            for (int j = 0; j < m; ++j)
                if (list[c][j] != word.symbols[j]) ++dist;
            if (dist < best_dist) {
                best_dist = dist;
                best = c;
            }
        }
    } else {
        const bool have_probs = !word.symbol_probs.empty();
        double best_metric = -std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < list.size(); ++c) {
            double logp = 0;
            for (int j = 0; j < m; ++j) {
                double p;
                if (have_probs)
                    p = word.symbol_probs[j][list[c][j]];
                else
                    p = list[c][j] == word.symbols[j] ? word.reliabilities[j]
                                                      : 1.0 - word.reliabilities[j];
                logp += std::log(p);
            }
            if (logp > best_metric) {
                best_metric = logp;
                best = c;
            }
        }
    }
    return list[best];
}

} // namespace rspolar
