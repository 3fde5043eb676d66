#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rspolar/polar.hpp"

using namespace rspolar;

// Dense G^(x s) built from the Kronecker definition; the matrix oracle.
static std::vector<std::vector<std::uint8_t>> dense_kronecker(int s) {
    std::vector<std::vector<std::uint8_t>> g{{1}};
    for (int lev = 0; lev < s; ++lev) {
        size_t h = g.size();
        std::vector<std::vector<std::uint8_t>> next(2 * h, std::vector<std::uint8_t>(2 * h, 0));
        for (size_t i = 0; i < h; ++i)
            for (size_t j = 0; j < h; ++j) {
                next[i][j] = g[i][j];
                next[i + h][j] = g[i][j];
                next[i + h][j + h] = g[i][j];
            }
        g = std::move(next);
    }
    return g;
}

static std::vector<std::uint8_t> dense_mul(const std::vector<std::uint8_t>& u,
                                           const std::vector<std::vector<std::uint8_t>>& g) {
    std::vector<std::uint8_t> x(u.size(), 0);
    for (size_t j = 0; j < u.size(); ++j)
        for (size_t i = 0; i < u.size(); ++i)
            x[j] ^= u[i] & g[i][j];
    return x;
}

TEST_CASE("check-node combine against the atanh and log-ratio forms") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif(-30.0, 30.0);
    for (int trial = 0; trial < 20000; ++trial) {
        double a = unif(rng), b = unif(rng);
        double direct = 2.0 * std::atanh(std::tanh(a / 2) * std::tanh(b / 2));
        double ratio = std::log((1.0 + std::exp(a + b)) / (std::exp(a) + std::exp(b)));
        CHECK(llr_f(a, b) == Catch::Approx(direct).margin(1e-9));
        CHECK(llr_f(a, b) == Catch::Approx(ratio).margin(1e-9));
        // |f| never exceeds the weaker input
        CHECK(std::fabs(llr_f(a, b)) <= std::min(std::fabs(a), std::fabs(b)) + 1e-12);
        // odd symmetry in each argument
        CHECK(llr_f(-a, b) == -llr_f(a, b));
        CHECK(llr_f(a, -b) == -llr_f(a, b));
    }
    // exact erasure and certainty propagation
    CHECK(llr_f(0.0, 3.0) == 0.0);
    CHECK(llr_f(-2.0, 0.0) == 0.0);
    CHECK(llr_f(kInf, 3.5) == 3.5);
    CHECK(llr_f(-kInf, 3.5) == -3.5);
    CHECK(llr_f(kInf, kInf) == kInf);
    CHECK(llr_f(kInf, -kInf) == -kInf);
    CHECK(llr_g(kInf, -kInf, 0) == 0.0);
    CHECK(llr_g(kInf, kInf, 1) == 0.0);
    CHECK(llr_g(3.0, -1.0, 1) == -4.0);
}

// With matched encoder/decoder conventions and sign-covariant f/g, the
// soft-value magnitudes of a genie-aided pass are invariant under any change
// of the transmitted input when the noise is flipped along with the signal,
// and the error indicators agree except at exact-zero ties (which decide 0
// by policy and so follow the transmitted bit).
TEST_CASE("SC decisions are coset-covariant") {
    const int s = 6, n = 64;
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    PolarCode full(s, all);
    std::mt19937_64 rng(20);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    const double a = 0.8;
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::uint8_t> ua(n), ub(n);
        for (int i = 0; i < n; ++i) ua[i] = static_cast<std::uint8_t>(rng() & 1);
        for (int i = 0; i < n; ++i) ub[i] = (i % 3 == 0) ? 0 : ua[i];
        std::vector<double> noise(n);
        for (auto& v : noise) v = gauss(rng);
        auto llrs_of = [&](const std::vector<std::uint8_t>& u, bool flip_noise,
                           const std::vector<std::uint8_t>& xref) {
            std::vector<std::uint8_t> x(n);
            for (int i = 0; i < n; ++i) x[bit_reverse(i, s)] = u[i];
            polar_transform_inplace(x);
            std::vector<double> soft(n);
            for (int i = 0; i < n; ++i) {
                double nz = flip_noise && x[i] != xref[i] ? -noise[i] : noise[i];
                soft[i] = 4.0 * ((x[i] ? -a : a) + nz) * a;
            }
            return std::pair{x, soft};
        };
        auto [xa, softa] = llrs_of(ua, false, {});
        auto [xb, softb] = llrs_of(ub, true, xa);
        std::vector<std::uint8_t> wa(n), wb(n);
        ScDecoder da(full, softa), db(full, softb);
        da.genie_decode(ua, wa);
        db.genie_decode(ub, wb);
        for (int i = 0; i < n; ++i) {
            REQUIRE(std::fabs(da.soft_values()[i]) == std::fabs(db.soft_values()[i]));
            if (da.soft_values()[i] != 0.0) REQUIRE(wa[i] == wb[i]);
        }
    }
}

TEST_CASE("bec construction, hand-derived values") {
    auto z1 = bec_bit_channels(1, 0.5);
    REQUIRE(z1.size() == 2);
    CHECK(z1[0] == Catch::Approx(0.75));
    CHECK(z1[1] == Catch::Approx(0.25));

    auto z2 = bec_bit_channels(2, 0.5);
    REQUIRE(z2.size() == 4);
    CHECK(z2[0] == Catch::Approx(0.9375));
    CHECK(z2[1] == Catch::Approx(0.5625));
    CHECK(z2[2] == Catch::Approx(0.4375));
    CHECK(z2[3] == Catch::Approx(0.0625));
}

TEST_CASE("bec construction conserves erasure probability and recursion structure") {
    for (int s = 1; s <= 10; ++s) {
        for (double eps : {0.1, 0.5, 0.9}) {
            auto z = bec_bit_channels(s, eps);
            double sum = 0;
            for (double v : z) sum += v;
            CHECK(sum == Catch::Approx((1 << s) * eps).margin(1e-12));
            if (s >= 2) {
                // pairwise: each adjacent pair comes from one parent value
                auto parent = bec_bit_channels(s - 1, eps);
                for (size_t i = 0; i < parent.size(); ++i) {
                    CHECK(z[2 * i] == Catch::Approx(2 * parent[i] - parent[i] * parent[i]));
                    CHECK(z[2 * i + 1] == Catch::Approx(parent[i] * parent[i]));
                }
            }
        }
    }
}

TEST_CASE("select_info_set") {
    auto z = bec_bit_channels(2, 0.5);
    CHECK(select_info_set(z, 4) == std::vector<int>{0, 1, 2, 3});
    CHECK(select_info_set(z, 1) == std::vector<int>{3});
    CHECK(select_info_set(z, 2) == std::vector<int>{2, 3});
    // ties break toward the smaller index
    std::vector<double> flat(4, 0.5);
    CHECK(select_info_set(flat, 2) == std::vector<int>{0, 1});
}

TEST_CASE("polar transform matches the dense matrix and the G rows for n=2") {
    CHECK(polar_transform(std::vector<std::uint8_t>{1, 0}) == std::vector<std::uint8_t>{1, 0});
    CHECK(polar_transform(std::vector<std::uint8_t>{0, 1}) == std::vector<std::uint8_t>{1, 1});

    std::mt19937_64 rng(5);
    for (int s = 1; s <= 5; ++s) {
        auto g = dense_kronecker(s);
        const int n = 1 << s;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<std::uint8_t> u(n);
            for (auto& b : u) b = static_cast<std::uint8_t>(rng() & 1);
            CHECK(polar_transform(u) == dense_mul(u, g));
        }
    }
}

TEST_CASE("polar transform is an involution for n up to 1024") {
    std::mt19937_64 rng(6);
    for (int s = 1; s <= 10; ++s) {
        const int n = 1 << s;
        std::vector<std::uint8_t> u(n);
        for (auto& b : u) b = static_cast<std::uint8_t>(rng() & 1);
        CHECK(polar_transform(polar_transform(u)) == u);
    }
}

TEST_CASE("polar_encode scatters zeros to the zero codeword") {
    PolarCode code(3, {3, 5, 6, 7});
    auto x = polar_encode(code, std::vector<std::uint8_t>(4, 0));
    CHECK(std::all_of(x.begin(), x.end(), [](std::uint8_t b) { return b == 0; }));
    CHECK_THROWS_AS(polar_encode(code, std::vector<std::uint8_t>(3, 0)), std::invalid_argument);
}

TEST_CASE("sc_decode hand example, n=2 over BEC") {
    PolarCode code(1, {0, 1});
    std::vector<double> soft{0.0, kInf};
    ScDecoder dec(code, soft);
    auto res = dec.decode_all();
    CHECK(dec.soft_values()[0] == 0.0); // erased, tie-broken to 0
    CHECK(res.u[0] == 0);
    CHECK(dec.soft_values()[1] == kInf);
    CHECK(res.u[1] == 0);
}

TEST_CASE("noiseless round trip for all n <= 1024") {
    std::mt19937_64 rng(9);
    for (int s = 1; s <= 10; ++s) {
        const int n = 1 << s;
        auto z = bec_bit_channels(s, 0.5);
        auto info = select_info_set(z, std::max(1, n / 2));
        PolarCode code(s, info);
        int trials = s <= 6 ? 100 : 20;
        for (int trial = 0; trial < trials; ++trial) {
            std::vector<std::uint8_t> msg(code.k());
            for (auto& b : msg) b = static_cast<std::uint8_t>(rng() & 1);
            auto x = polar_encode(code, msg);
            std::vector<double> soft(n);
            for (int i = 0; i < n; ++i) soft[i] = x[i] ? -kInf : kInf;
            auto res = sc_decode(code, soft);
            REQUIRE(res.info == msg);
        }
    }
}

TEST_CASE("sc_decode recovers under mild BEC noise (sanity, not a bound)") {
    std::mt19937_64 rng(10);
    auto z = bec_bit_channels(6, 0.3);
    auto info = select_info_set(z, 20);
    PolarCode code(6, info);
    ChannelModel ch = ChannelModel::bec(0.05);
    int errors = 0;
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::uint8_t> msg(code.k());
        for (auto& b : msg) b = static_cast<std::uint8_t>(rng() & 1);
        auto x = polar_encode(code, msg);
        auto soft = ch.transmit(x, rng);
        auto res = sc_decode(code, soft);
        if (res.info != msg) ++errors;
    }
    CHECK(errors < 30);
}

TEST_CASE("genie estimates: noiseless channel gives zero error probability") {
    auto q = mc_bitchannel_estimate(4, ChannelModel::noiseless(), 50, 123);
    for (double p : q.p) CHECK(p == 0.0);
}

TEST_CASE("genie estimates are reproducible bit-for-bit under the same seed") {
    ChannelModel ch = ChannelModel::bec(0.4);
    auto a = mc_bitchannel_estimate(5, ch, 500, 77);
    auto b = mc_bitchannel_estimate(5, ch, 500, 77);
    CHECK(a.p == b.p);
    auto c = mc_bitchannel_estimate(5, ch, 500, 78);
    CHECK(a.p != c.p);
}

TEST_CASE("genie estimates approach z/2 on the BEC") {
    const int s = 6, n = 64;
    const double eps = 0.35;
    const long trials = 100000;
    auto z = bec_bit_channels(s, eps);
    auto q = mc_bitchannel_estimate(s, ChannelModel::bec(eps), trials, 2024);
    for (int i = 0; i < n; ++i) {
        double expect = z[i] / 2.0;
        double sigma = std::sqrt(std::max(expect * (1 - expect), 1e-12) / trials);
        CHECK(std::fabs(q.p[i] - expect) <= 3 * sigma + 1e-9);
    }
}

TEST_CASE("group decoding concatenates to the plain SC output") {
    std::mt19937_64 rng(13);
    auto z = bec_bit_channels(6, 0.4);
    auto info = select_info_set(z, 32);
    PolarCode code(6, info);
    ChannelModel ch = ChannelModel::bec(0.3);
    const int t = 4;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint8_t> msg(code.k());
        for (auto& b : msg) b = static_cast<std::uint8_t>(rng() & 1);
        auto x = polar_encode(code, msg);
        auto soft = ch.transmit(x, rng);

        auto plain = sc_decode(code, soft);
        ScDecoder dec(code, soft);
        std::vector<std::uint8_t> stitched;
        for (int g = 0; g < code.k() / t; ++g) {
            auto gr = dec.decode_group(g, t);
            stitched.insert(stitched.end(), gr.bits.begin(), gr.bits.end());
            dec.set_group_decision(g, gr.bits); // finalize unchanged
        }
        REQUIRE(stitched == plain.info);
        REQUIRE(dec.decisions() == plain.u);
    }
}

TEST_CASE("set_group_decision replay equals a fresh run with forced prefix") {
    std::mt19937_64 rng(14);
    auto z = bec_bit_channels(7, 0.4);
    auto info = select_info_set(z, 64);
    PolarCode code(7, info);
    ChannelModel ch = ChannelModel::bsc(0.05);
    const int t = 4;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::uint8_t> msg(code.k());
        for (auto& b : msg) b = static_cast<std::uint8_t>(rng() & 1);
        auto x = polar_encode(code, msg);
        auto soft = ch.transmit(x, rng);

        // corrected run: flip one bit of group 0's decisions, then continue
        ScDecoder dec(code, soft);
        auto g0 = dec.decode_group(0, t);
        auto corrected = g0.bits;
        corrected[trial % t] ^= 1;
        dec.set_group_decision(0, corrected);
        for (int g = 1; g < code.k() / t; ++g) {
            auto gr = dec.decode_group(g, t);
            dec.set_group_decision(g, gr.bits);
        }

        // oracle: a genie pass forces each phase to the corrected run's
        // decisions without any snapshot/replay machinery, so every
        // decision-time soft value must agree with the corrected run
        ScDecoder oracle(code, soft);
        std::vector<std::uint8_t> wrong(code.n);
        oracle.genie_decode(dec.decisions(), wrong);
        REQUIRE(oracle.soft_values() == dec.soft_values());
        // and the corrected run's free decisions are the hard decisions of
        // those soft values
        std::vector<std::uint8_t> in_group0(code.n, 0);
        for (int b = 0; b < t; ++b) in_group0[code.info_set[b]] = 1;
        for (int idx : code.info_set)
            if (!in_group0[idx])
                REQUIRE(dec.decisions()[idx] == llr_hard(dec.soft_values()[idx]));
    }
}

TEST_CASE("set_group_decision with unchanged bits is a no-op") {
    auto z = bec_bit_channels(5, 0.4);
    PolarCode code(5, select_info_set(z, 16));
    std::mt19937_64 rng(15);
    std::vector<std::uint8_t> msg(16);
    for (auto& b : msg) b = static_cast<std::uint8_t>(rng() & 1);
    auto x = polar_encode(code, msg);
    auto soft = ChannelModel::bsc(0.1).transmit(x, rng);

    ScDecoder a(code, soft), b(code, soft);
    auto ga = a.decode_group(0, 4);
    a.set_group_decision(0, ga.bits);
    auto gb = b.decode_group(0, 4);
    b.set_group_decision(0, gb.bits);
    auto na = a.decode_group(1, 4);
    auto nb = b.decode_group(1, 4);
    CHECK(na.bits == nb.bits);
    CHECK(na.soft == nb.soft);
}

TEST_CASE("out-of-order group access throws") {
    auto z = bec_bit_channels(4, 0.4);
    PolarCode code(4, select_info_set(z, 8));
    std::vector<double> soft(16, kInf);
    ScDecoder dec(code, soft);
    CHECK_THROWS_AS(dec.decode_group(1, 4), std::logic_error);
    auto g0 = dec.decode_group(0, 4);
    CHECK_THROWS_AS(dec.decode_group(0, 4), std::logic_error); // not finalized yet
    CHECK_THROWS_AS(dec.set_group_decision(1, g0.bits), std::logic_error);
}

TEST_CASE("symbol_soft_output: noiseless gives unit mass on the transmitted pattern") {
    auto z = bec_bit_channels(5, 0.4);
    PolarCode code(5, select_info_set(z, 8));
    std::mt19937_64 rng(16);
    const int t = 4;
    std::vector<std::uint8_t> msg(code.k());
    for (auto& b : msg) b = static_cast<std::uint8_t>(rng() & 1);
    auto x = polar_encode(code, msg);
    std::vector<double> soft(code.n);
    for (int i = 0; i < code.n; ++i) soft[i] = x[i] ? -kInf : kInf;

    ScDecoder dec(code, soft);
    auto gr = dec.decode_group(0, t);
    auto probs = dec.symbol_soft_output(0, t);
    int pattern = 0;
    for (int b = 0; b < t; ++b) pattern |= msg[b] << b;
    for (int v = 0; v < (1 << t); ++v)
        CHECK(probs[v] == Catch::Approx(v == pattern ? 1.0 : 0.0).margin(1e-12));
    dec.set_group_decision(0, gr.bits);
}

TEST_CASE("symbol_soft_output probabilities sum to 1 on noisy input") {
    auto z = bec_bit_channels(6, 0.4);
    PolarCode code(6, select_info_set(z, 16));
    std::mt19937_64 rng(17);
    const int t = 4;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::uint8_t> msg(code.k());
        for (auto& b : msg) b = static_cast<std::uint8_t>(rng() & 1);
        auto x = polar_encode(code, msg);
        auto soft = ChannelModel::awgn_bpsk(1.0, 0.25).transmit(x, rng);
        ScDecoder dec(code, soft);
        for (int g = 0; g < code.k() / t; ++g) {
            auto gr = dec.decode_group(g, t);
            auto probs = dec.symbol_soft_output(g, t);
            double sum = 0;
            for (double p : probs) sum += p;
            CHECK(sum == Catch::Approx(1.0).margin(1e-9));
            dec.set_group_decision(g, gr.bits);
        }
    }
}

// Constrained-run oracle: the probability of a pattern equals the product of
// per-step bit posteriors along that path, computed by independent SC runs
// with the group bits forced.
TEST_CASE("symbol_soft_output matches constrained SC runs, t=2 n=4") {
    PolarCode code(2, {1, 2}); // k = 2, one group of t = 2
    std::mt19937_64 rng(18);
    const int t = 2;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint8_t> msg(2);
        for (auto& b : msg) b = static_cast<std::uint8_t>(rng() & 1);
        auto x = polar_encode(code, msg);
        auto soft = ChannelModel::awgn_bpsk(0.0, 0.5).transmit(x, rng);

        ScDecoder dec(code, soft);
        dec.decode_group(0, t);
        auto probs = dec.symbol_soft_output(0, t);

        // oracle: for each pattern walk a fresh decoder, forcing the bits and
        // collecting sigma((1-2b) llr) at each info phase
        std::vector<double> oracle(4);
        for (int pat = 0; pat < 4; ++pat) {
            ScDecoder run(code, soft);
            double p = 1.0;
            std::uint8_t bits[2] = {static_cast<std::uint8_t>(pat & 1),
                                    static_cast<std::uint8_t>((pat >> 1) & 1)};
            // phase stepping via groups of size 1 is not available; use the
            // set_group_decision replay instead: decode then force.
            auto gr = run.decode_group(0, t);
            (void)gr;
            run.set_group_decision(0, std::vector<std::uint8_t>{bits[0], bits[1]});
            // after the forced replay, soft_values hold the path's LLRs
            double l1 = run.soft_values()[code.info_set[0]];
            double l2 = run.soft_values()[code.info_set[1]];
            p = llr_bit_prob(l1, bits[0]) * llr_bit_prob(l2, bits[1]);
            oracle[pat] = p;
        }
        double sum = oracle[0] + oracle[1] + oracle[2] + oracle[3];
        for (int pat = 0; pat < 4; ++pat)
            CHECK(probs[pat] == Catch::Approx(oracle[pat] / sum).margin(1e-9));
    }
}

TEST_CASE("frozen indices always decode to zero and corrections touch info bits only") {
    auto z = bec_bit_channels(5, 0.45);
    PolarCode code(5, select_info_set(z, 12));
    std::mt19937_64 rng(19);
    std::vector<std::uint8_t> msg(12);
    for (auto& b : msg) b = static_cast<std::uint8_t>(rng() & 1);
    auto x = polar_encode(code, msg);
    auto soft = ChannelModel::bec(0.5).transmit(x, rng);

    ScDecoder dec(code, soft);
    const int t = 4;
    for (int g = 0; g < 3; ++g) {
        auto gr = dec.decode_group(g, t);
        auto corrected = gr.bits;
        corrected[0] ^= 1;
        dec.set_group_decision(g, corrected);
    }
    std::vector<std::uint8_t> frozen(code.n, 1);
    for (int idx : code.info_set) frozen[idx] = 0;
    for (int i = 0; i < code.n; ++i)
        if (frozen[i]) CHECK(dec.decisions()[i] == 0);
}
