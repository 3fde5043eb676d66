// Finite field GF(2^t) arithmetic with log/antilog tables, plus the small
// polynomial toolkit used by the Reed-Solomon codec.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rspolar {

using gf_elem = std::uint16_t;

// Conventional minimal-weight primitive polynomials, indexed by t.
inline std::uint32_t default_primitive_poly(int t) {
    switch (t) {
        case 2: return 0x7;     // x^2 + x + 1
        case 3: return 0xB;     // x^3 + x + 1
        case 4: return 0x13;    // x^4 + x + 1
        case 5: return 0x25;    // x^5 + x^2 + 1
        case 6: return 0x43;    // x^6 + x + 1
        case 7: return 0x89;    // x^7 + x^3 + 1
        case 8: return 0x11D;   // x^8 + x^4 + x^3 + x^2 + 1
        case 9: return 0x211;   // x^9 + x^4 + 1
        case 10: return 0x409;  // x^10 + x^3 + 1
        case 11: return 0x805;  // x^11 + x^2 + 1
        case 12: return 0x1053; // x^12 + x^6 + x^4 + x + 1
        default:
            throw std::invalid_argument("GF(2^t): t must be in [2,12], got t=" + std::to_string(t));
    }
}

class Field {
public:
    explicit Field(int t, std::uint32_t primitive_poly = 0)
        : t_(t), poly_(primitive_poly ? primitive_poly : default_primitive_poly(t)) {
        if (t < 2 || t > 12)
            throw std::invalid_argument("GF(2^t): t must be in [2,12]");
        const int q = 1 << t_;
        if ((poly_ >> t_) != 1u)
            throw std::invalid_argument("primitive polynomial must have degree exactly t");
        log_.assign(q, 0);
        exp_.assign(2 * (q - 1), 0);
        // Generate the multiplicative group by repeated multiplication by alpha = x.
        std::uint32_t v = 1;
        for (int i = 0; i < q - 1; ++i) {
            if (v == 1 && i != 0)
                throw std::invalid_argument("polynomial is not primitive: alpha cycle length " +
                                            std::to_string(i) + " < " + std::to_string(q - 1));
            exp_[i] = static_cast<gf_elem>(v);
            exp_[i + (q - 1)] = static_cast<gf_elem>(v); // doubled table avoids a mod in mul()
            log_[v] = static_cast<gf_elem>(i);
            v <<= 1;
            if (v & q) v ^= poly_;
        }
        if (v != 1)
            throw std::invalid_argument("polynomial is not primitive over GF(2^t)");
    }

    int t() const { return t_; }
    std::uint32_t primitive_poly() const { return poly_; }
    int size() const { return 1 << t_; }
    int order() const { return (1 << t_) - 1; } // multiplicative group order

    static gf_elem add(gf_elem a, gf_elem b) { return a ^ b; }

    gf_elem mul(gf_elem a, gf_elem b) const {
        if (a == 0 || b == 0) return 0;
        return exp_[log_[a] + log_[b]];
    }

    gf_elem inv(gf_elem a) const {
        if (a == 0) throw std::domain_error("GF(2^t): zero has no multiplicative inverse");
        if (a == 1) return 1;
        return exp_[order() - log_[a]];
    }

    gf_elem div(gf_elem a, gf_elem b) const { return mul(a, inv(b)); }

    // alpha^e for any integer exponent (negative allowed).
    gf_elem alpha_pow(long e) const {
        long m = order();
        long r = e % m;
        if (r < 0) r += m;
        return exp_[r];
    }

    int log(gf_elem a) const {
        if (a == 0) throw std::domain_error("GF(2^t): log of zero");
        return log_[a];
    }

    // Shared immutable instances keyed by (t, poly); safe across threads.
    static const Field& get(int t, std::uint32_t primitive_poly = 0) {
        static std::mutex mu;
        static std::map<std::pair<int, std::uint32_t>, std::unique_ptr<Field>> cache;
        std::uint32_t p = primitive_poly ? primitive_poly : default_primitive_poly(t);
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[{t, p}];
        if (!slot) slot = std::make_unique<Field>(t, p);
        return *slot;
    }

private:
    int t_;
    std::uint32_t poly_;
    std::vector<gf_elem> log_;
    std::vector<gf_elem> exp_;
};

// Polynomials over GF(2^t), coefficients lowest degree first.
using Poly = std::vector<gf_elem>;

inline void poly_trim(Poly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

inline int poly_deg(const Poly& p) { return static_cast<int>(p.size()) - 1; } // -1 for zero poly

inline Poly poly_add(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), 0);
    for (size_t i = 0; i < a.size(); ++i) r[i] ^= a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] ^= b[i];
    poly_trim(r);
    return r;
}

inline Poly poly_mul(const Field& f, const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] ^= f.mul(a[i], b[j]);
    }
    poly_trim(r);
    return r;
}

// Horner evaluation.
inline gf_elem poly_eval(const Field& f, const Poly& p, gf_elem x) {
    gf_elem acc = 0;
    for (size_t i = p.size(); i-- > 0;)
        acc = static_cast<gf_elem>(f.mul(acc, x) ^ p[i]);
    return acc;
}

// Remainder of a modulo b (b nonzero, leading coefficient nonzero).
inline Poly poly_mod(const Field& f, Poly a, const Poly& b) {
    poly_trim(a);
    if (b.empty()) throw std::domain_error("poly_mod: division by zero polynomial");
    const int db = poly_deg(b);
    const gf_elem lead_inv = f.inv(b.back());
    while (poly_deg(a) >= db) {
        const int shift = poly_deg(a) - db;
        const gf_elem q = f.mul(a.back(), lead_inv);
        for (int i = 0; i <= db; ++i)
            a[i + shift] ^= f.mul(q, b[i]);
        poly_trim(a);
    }
    return a;
}

// Formal derivative; characteristic 2 keeps only the odd-degree terms.
inline Poly poly_derivative(const Poly& p) {
    Poly r;
    for (size_t i = 1; i < p.size(); i += 2) {
        r.resize(i, 0);
        r[i - 1] = p[i];
    }
    poly_trim(r);
    return r;
}

} // namespace rspolar
