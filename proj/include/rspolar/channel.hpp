// Channel models producing per-bit soft values (log-likelihood ratios,
// positive favors bit 0, +/-inf for perfectly known bits, 0 for erasures).
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rspolar {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ChannelModel {
    enum class Kind { Bsc, Bec, AwgnBpsk, GilbertElliot, Burst };

    Kind kind = Kind::Bec;
    double p = 0.0;             // BSC crossover / BEC erasure probability
    double ebn0_db = 0.0;       // AWGN operating point
    double code_rate = std::numeric_limits<double>::quiet_NaN(); // AWGN Eb -> Es
    double stay_good = 0.0;     // Gilbert-Elliot P
    double stay_bad = 0.0;      // Gilbert-Elliot Q
    std::shared_ptr<const ChannelModel> good;  // GE good-state sub-channel (BSC/BEC)
    std::size_t burst_start = 0;
    std::size_t burst_len = 0;
    std::shared_ptr<const ChannelModel> base;  // channel under the forced burst

    static ChannelModel bsc(double crossover) {
        require(crossover >= 0.0 && crossover <= 1.0, "BSC crossover probability must be in [0,1]");
        ChannelModel c;
        c.kind = Kind::Bsc;
        c.p = crossover;
        return c;
    }
    static ChannelModel bec(double erasure) {
        require(erasure >= 0.0 && erasure <= 1.0, "BEC erasure probability must be in [0,1]");
        ChannelModel c;
        c.kind = Kind::Bec;
        c.p = erasure;
        return c;
    }
    static ChannelModel noiseless() { return bec(0.0); }
    static ChannelModel awgn_bpsk(double ebn0_db, double code_rate = std::numeric_limits<double>::quiet_NaN()) {
        ChannelModel c;
        c.kind = Kind::AwgnBpsk;
        c.ebn0_db = ebn0_db;
        c.code_rate = code_rate;
        return c;
    }
    static ChannelModel gilbert_elliot(double P, double Q, ChannelModel good_state) {
        require(P >= 0.0 && P <= 1.0 && Q >= 0.0 && Q <= 1.0, "GE stay probabilities must be in [0,1]");
        require(good_state.kind == Kind::Bsc || good_state.kind == Kind::Bec,
                "GE good state must be a BSC or BEC");
        ChannelModel c;
        c.kind = Kind::GilbertElliot;
        c.stay_good = P;
        c.stay_bad = Q;
        c.good = std::make_shared<ChannelModel>(std::move(good_state));
        return c;
    }
    static ChannelModel burst(std::size_t start, std::size_t len, ChannelModel base_model) {
        require(base_model.kind != Kind::Burst, "burst channels do not nest");
        ChannelModel c;
        c.kind = Kind::Burst;
        c.burst_start = start;
        c.burst_len = len;
        c.base = std::make_shared<ChannelModel>(std::move(base_model));
        return c;
    }

    ChannelModel with_rate(double rate) const {
        ChannelModel c = *this;
        if (c.kind == Kind::AwgnBpsk && std::isnan(c.code_rate)) c.code_rate = rate;
        return c;
    }

    // Re-parameterize at an operating point: Eb/N0 for AWGN, the probability
    // parameter for BSC/BEC. Other kinds are fixed by their descriptor.
    ChannelModel at_point(double point) const {
        ChannelModel c = *this;
        switch (kind) {
            case Kind::AwgnBpsk: c.ebn0_db = point; break;
            case Kind::Bsc: c = bsc(point); break;
            case Kind::Bec: c = bec(point); break;
            default: break;
        }
        return c;
    }

    std::vector<double> transmit(std::span<const std::uint8_t> bits, std::mt19937_64& rng) const {
        std::vector<double> soft(bits.size());
        transmit_into(bits, rng, soft);
        return soft;
    }

    void transmit_into(std::span<const std::uint8_t> bits, std::mt19937_64& rng,
                       std::span<double> soft) const {
        const std::size_t L = bits.size();
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        switch (kind) {
            case Kind::Bsc: {
                const double mag = p <= 0.0 ? kInf : (p >= 1.0 ? -kInf : std::log((1.0 - p) / p));
                for (std::size_t i = 0; i < L; ++i) {
                    std::uint8_t observed = bits[i] ^ (unif(rng) < p ? 1 : 0);
                    soft[i] = observed ? -mag : mag;
                }
                break;
            }
            case Kind::Bec: {
                for (std::size_t i = 0; i < L; ++i) {
                    if (p > 0.0 && unif(rng) < p)
                        soft[i] = 0.0;
                    else
                        soft[i] = bits[i] ? -kInf : kInf;
                }
                break;
            }
            case Kind::AwgnBpsk: {
                require(!std::isnan(code_rate) && code_rate > 0.0,
                        "AWGN channel needs a code rate for the Eb->Es conversion");
                // N0 = 1, Es = R * Eb, y = +/-sqrt(Es) + N(0, N0/2), LLR = 4 y sqrt(Es) / N0
                const double es = code_rate * std::pow(10.0, ebn0_db / 10.0);
                const double a = std::sqrt(es);
                std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
                for (std::size_t i = 0; i < L; ++i) {
                    double y = (bits[i] ? -a : a) + gauss(rng);
                    soft[i] = 4.0 * y * a;
                }
                break;
            }
            case Kind::GilbertElliot: {
                auto [pi_good, pi_bad] = stationary_distribution(stay_good, stay_bad);
                (void)pi_bad;
                bool in_good = unif(rng) < pi_good;
                for (std::size_t i = 0; i < L; ++i) {
                    if (in_good)
                        good->transmit_into(bits.subspan(i, 1), rng, soft.subspan(i, 1));
                    else
                        soft[i] = 0.0;
                    double stay = in_good ? stay_good : stay_bad;
                    if (unif(rng) >= stay) in_good = !in_good;
                }
                break;
            }
            case Kind::Burst: {
                require(burst_len >= 1 && burst_start + burst_len <= L,
                        "burst must lie within the frame");
                base->transmit_into(bits, rng, soft);
                for (std::size_t i = burst_start; i < burst_start + burst_len; ++i)
                    soft[i] = 0.0;
                break;
            }
        }
    }

    static std::pair<double, double> stationary_distribution(double P, double Q) {
        if (P == 1.0 && Q == 1.0)
            throw std::domain_error("Gilbert-Elliot chain with P=Q=1 has no unique stationary state");
        double pi_good = (1.0 - Q) / ((1.0 - P) + (1.0 - Q));
        return {pi_good, 1.0 - pi_good};
    }

    std::string to_string() const {
        std::ostringstream os;
        switch (kind) {
            case Kind::Bsc: os << "bsc:" << p; break;
            case Kind::Bec: os << "bec:" << p; break;
            case Kind::AwgnBpsk:
                os << "awgn:" << ebn0_db;
                if (!std::isnan(code_rate)) os << ",rate=" << code_rate;
                break;
            case Kind::GilbertElliot:
                os << "ge:P=" << stay_good << ",Q=" << stay_bad << ",good=" << good->to_string();
                break;
            case Kind::Burst:
                os << "burst:start=" << burst_start << ",len=" << burst_len
                   << ",base=" << base->to_string();
                break;
        }
        return os.str();
    }

private:
    static void require(bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    }
};

// Descriptor grammar:
//   noiseless | bsc:<p> | bec:<eps> | awgn:<EbN0dB>[,rate=<R>]
//   ge:P=<P>,Q=<Q>,good=<descriptor>
//   burst:start=<i>,len=<l>,base=<descriptor>
inline ChannelModel parse_channel(const std::string& text);

namespace detail {

inline double parse_num(const std::string& s, const std::string& ctx) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("channel descriptor: bad number '" + s + "' in " + ctx);
    }
}

// Splits "k1=v1,k2=v2,..." where the final value may itself contain commas
// (nested descriptors always come last).
inline std::vector<std::pair<std::string, std::string>> parse_kv(const std::string& body,
                                                                 const std::string& last_key) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t eq = body.find('=', pos);
        if (eq == std::string::npos)
            throw std::invalid_argument("channel descriptor: expected key=value in '" + body + "'");
        std::string key = body.substr(pos, eq - pos);
        std::size_t end;
        if (key == last_key)
            end = body.size();
        else
            end = std::min(body.find(',', eq + 1), body.size());
        out.emplace_back(key, body.substr(eq + 1, end - eq - 1));
        pos = end == body.size() ? end : end + 1;
    }
    return out;
}

} // namespace detail

inline ChannelModel parse_channel(const std::string& text) {
    if (text == "noiseless") return ChannelModel::noiseless();
    std::size_t colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("channel descriptor: expected '<kind>:<params>', got '" + text + "'");
    std::string kind = text.substr(0, colon);
    std::string body = text.substr(colon + 1);
    if (kind == "bsc") return ChannelModel::bsc(detail::parse_num(body, "bsc"));
    if (kind == "bec") return ChannelModel::bec(detail::parse_num(body, "bec"));
    if (kind == "awgn") {
        std::size_t comma = body.find(',');
        double ebn0 = detail::parse_num(body.substr(0, comma), "awgn");
        double rate = std::numeric_limits<double>::quiet_NaN();
        if (comma != std::string::npos) {
            auto kv = detail::parse_kv(body.substr(comma + 1), "");
            for (auto& [k, v] : kv) {
                if (k == "rate") rate = detail::parse_num(v, "awgn rate");
                else throw std::invalid_argument("channel descriptor: unknown awgn key '" + k + "'");
            }
        }
        return ChannelModel::awgn_bpsk(ebn0, rate);
    }
    if (kind == "ge") {
        double P = -1, Q = -1;
        ChannelModel good = ChannelModel::noiseless();
        bool have_good = false;
        for (auto& [k, v] : detail::parse_kv(body, "good")) {
            if (k == "P") P = detail::parse_num(v, "ge P");
            else if (k == "Q") Q = detail::parse_num(v, "ge Q");
            else if (k == "good") { good = parse_channel(v); have_good = true; }
            else throw std::invalid_argument("channel descriptor: unknown ge key '" + k + "'");
        }
        if (P < 0 || Q < 0 || !have_good)
            throw std::invalid_argument("channel descriptor: ge needs P=, Q= and good=");
        return ChannelModel::gilbert_elliot(P, Q, std::move(good));
    }
    if (kind == "burst") {
        long start = -1, len = -1;
        ChannelModel base = ChannelModel::noiseless();
        bool have_base = false;
        for (auto& [k, v] : detail::parse_kv(body, "base")) {
            if (k == "start") start = static_cast<long>(detail::parse_num(v, "burst start"));
            else if (k == "len") len = static_cast<long>(detail::parse_num(v, "burst len"));
            else if (k == "base") { base = parse_channel(v); have_base = true; }
            else throw std::invalid_argument("channel descriptor: unknown burst key '" + k + "'");
        }
        if (start < 0 || len < 1 || !have_base)
            throw std::invalid_argument("channel descriptor: burst needs start>=0, len>=1 and base=");
        return ChannelModel::burst(static_cast<std::size_t>(start), static_cast<std::size_t>(len),
                                   std::move(base));
    }
    throw std::invalid_argument("channel descriptor: unknown kind '" + kind + "'");
}

} // namespace rspolar
