// Monte Carlo block-error-rate harness: frame-parallel worker pool with
// per-frame rng streams keyed by (seed, frame index), so results are
// bit-identical for any worker count.
#pragma once

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rspolar/channel.hpp"
#include "rspolar/concat.hpp"
#include "rspolar/polar.hpp"

namespace rspolar {

inline std::pair<double, double> wilson_interval(long errors, long frames, double z = 1.959963984540054) {
    if (frames <= 0) throw std::invalid_argument("wilson_interval: frames must be > 0");
    double p = static_cast<double>(errors) / frames;
    double z2n = z * z / frames;
    double center = (p + z2n / 2.0) / (1.0 + z2n);
    double half = z / (1.0 + z2n) * std::sqrt(p * (1.0 - p) / frames + z * z / (4.0 * frames * frames));
    double lo = errors == 0 ? 0.0 : std::max(0.0, center - half);
    double hi = errors == frames ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

enum class DecoderKind { PolarOnly, Joint };

// One simulated code: either a bare polar code under plain SC, or the
// concatenation under one of the joint modes.
struct SimJob {
    DecoderKind kind = DecoderKind::PolarOnly;
    const PolarCode* polar = nullptr;  // used when kind == PolarOnly
    const ConcatCode* concat = nullptr;
    JointDecodeMode mode = JointDecodeMode::Sc;

    static SimJob polar_only(const PolarCode& code) {
        SimJob j;
        j.kind = DecoderKind::PolarOnly;
        j.polar = &code;
        return j;
    }
    static SimJob joint(const ConcatCode& code, JointDecodeMode mode) {
        SimJob j;
        j.kind = DecoderKind::Joint;
        j.concat = &code;
        j.mode = mode;
        return j;
    }

    long frame_bits() const {
        return kind == DecoderKind::PolarOnly ? polar->n : concat->total_bits();
    }
    long message_bits() const {
        return kind == DecoderKind::PolarOnly ? polar->k() : concat->message_bits();
    }
    double rate() const {
        return static_cast<double>(message_bits()) / static_cast<double>(frame_bits());
    }
};

struct StopRule {
    long max_frames = 1000000;
    long min_frame_errors = 100;
};

struct SimConfig {
    ChannelModel channel;           // re-parameterized per point via at_point
    std::vector<double> points;     // operating points; empty = single run as parsed
    StopRule stop;
    std::uint64_t seed = 1;
    int workers = 0;                // 0 = hardware concurrency
    long batch = 256;               // stop-rule granularity, worker-count independent
};

struct PointResult {
    double point = 0.0;
    long frames = 0;
    long frame_errors = 0;
    double bler = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double seconds = 0.0;
    long inner_codeword_errors = 0; // joint decoding only: inner polar words in error
    long inner_codewords = 0;
};

struct SimReport {
    std::vector<PointResult> points;
    std::uint64_t seed = 0;
    std::string spec_hash;
    std::string decoder;
    std::string channel;
    std::string version;
};

namespace detail {

struct FrameOutcome {
    bool frame_error = false;
    int inner_errors = 0;
    int inner_words = 0;
};

inline FrameOutcome run_frame(const SimJob& job, const ChannelModel& channel, std::uint64_t seed,
                              long frame_index) {
    auto rng = stream_rng(seed, static_cast<std::uint64_t>(frame_index));
    FrameOutcome out;
    if (job.kind == DecoderKind::PolarOnly) {
        const PolarCode& code = *job.polar;
        std::vector<std::uint8_t> msg(code.k());
        for (auto& b : msg) b = static_cast<std::uint8_t>(rng() & 1);
        auto x = polar_encode(code, msg);
        auto soft = channel.transmit(x, rng);
        auto res = sc_decode(code, soft);
        out.frame_error = res.info != msg;
    } else {
        const ConcatCode& code = *job.concat;
        std::vector<std::uint8_t> msg(code.message_bits());
        for (auto& b : msg) b = static_cast<std::uint8_t>(rng() & 1);
        auto frame = concat_encode(code, msg);
        auto soft = channel.transmit(frame, rng);
        auto res = joint_decode(code, job.mode, soft);
        out.frame_error = res.message != msg;
        // re-derive the transmitted outer words to count inner codeword errors
        out.inner_words = code.m;
        std::vector<std::vector<gf_elem>> sent(code.r);
        size_t pos = 0;
        for (int i = 0; i < code.r; ++i) {
            std::vector<gf_elem> m_syms(code.outer[i].kappa());
            for (auto& sym : m_syms) {
                gf_elem v = 0;
                for (int b = 0; b < code.t; ++b) v |= static_cast<gf_elem>(msg[pos++]) << b;
                sym = v;
            }
            sent[i] = code.outer[i].encode(m_syms);
        }
        for (int j = 0; j < code.m; ++j)
            for (int i = 0; i < code.r; ++i)
                if (res.words[i][j] != sent[i][j]) {
                    ++out.inner_errors;
                    break;
                }
    }
    return out;
}

} // namespace detail

// Simulates one operating point. Frames are processed in fixed-size batches;
// the stop rule is evaluated on whole batches only, which makes the totals
// independent of the worker count.
inline PointResult simulate_point(const SimJob& job, const ChannelModel& channel, double point_label,
                                  const StopRule& stop, std::uint64_t seed, int workers,
                                  long batch = 256) {
    if (stop.max_frames < 1) throw std::invalid_argument("simulate_point: max_frames must be >= 1");
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    auto t0 = std::chrono::steady_clock::now();

    PointResult res;
    res.point = point_label;
    long next_frame = 0;
    while (res.frames < stop.max_frames && res.frame_errors < stop.min_frame_errors) {
        long count = std::min(batch, stop.max_frames - res.frames);
        long first = next_frame;
        std::vector<long> errs(workers, 0), inner(workers, 0), words(workers, 0);
        auto work = [&](int w) {
            for (long idx = first + w; idx < first + count; idx += workers) {
                auto o = detail::run_frame(job, channel, seed, idx);
                errs[w] += o.frame_error ? 1 : 0;
                inner[w] += o.inner_errors;
                words[w] += o.inner_words;
            }
        };
        if (workers == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
            for (auto& th : pool) th.join();
        }
        for (int w = 0; w < workers; ++w) {
            res.frame_errors += errs[w];
            res.inner_codeword_errors += inner[w];
            res.inner_codewords += words[w];
        }
        res.frames += count;
        next_frame += count;
    }
    res.bler = static_cast<double>(res.frame_errors) / res.frames;
    auto [lo, hi] = wilson_interval(res.frame_errors, res.frames);
    res.ci_low = lo;
    res.ci_high = hi;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

inline SimReport run_bler(const SimJob& job, const SimConfig& config) {
    SimReport report;
    report.seed = config.seed;
    report.channel = config.channel.to_string();
    report.decoder = job.kind == DecoderKind::PolarOnly ? "polar-only" : to_string(job.mode);
    std::vector<double> points = config.points;
    bool labelled = !points.empty();
    if (points.empty()) points.push_back(0.0);
    for (double p : points) {
        ChannelModel ch = labelled ? config.channel.at_point(p) : config.channel;
        ch = ch.with_rate(job.rate());
        report.points.push_back(
            simulate_point(job, ch, p, config.stop, config.seed, config.workers, config.batch));
    }
    return report;
}

// Exact shortest round-trip decimal serialization.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

inline std::string report_csv(const SimReport& report) {
    std::ostringstream os;
    os << "point,frames,frame_errors,bler,ci_low,ci_high,seconds\n";
    for (const auto& p : report.points)
        os << format_double(p.point) << ',' << p.frames << ',' << p.frame_errors << ','
           << format_double(p.bler) << ',' << format_double(p.ci_low) << ','
           << format_double(p.ci_high) << ',' << format_double(p.seconds) << '\n';
    return os.str();
}

// --- burst experiments ----------------------------------------------------------

struct BurstTrialResult {
    long length = 0;
    long offset = 0;
    bool recovered = false;
    bool lr_one_fired = false; // some lemma index l*2^(s-q) saw soft value exactly 0
};

// Transmits random messages over an otherwise noiseless channel with one
// erased burst, and records recovery plus the deterministic LR=1 predicate
// (largest aligned sub-burst, polar-only jobs).
inline std::vector<BurstTrialResult> run_burst_experiment(const SimJob& job,
                                                          std::span<const long> lengths,
                                                          std::span<const long> offsets,
                                                          std::uint64_t seed = 1,
                                                          const ChannelModel& base = ChannelModel::noiseless()) {
    std::vector<BurstTrialResult> table;
    const long frame_bits = job.frame_bits();
    long trial = 0;
    for (long len : lengths) {
        for (long off : offsets) {
            BurstTrialResult row;
            row.length = len;
            row.offset = off;
            if (len < 0 || off < 0 || off + len > frame_bits)
                throw std::invalid_argument("run_burst_experiment: burst outside frame");
            auto rng = stream_rng(seed, static_cast<std::uint64_t>(trial++));
            ChannelModel ch = len == 0 ? base.with_rate(job.rate())
                                       : ChannelModel::burst(static_cast<std::size_t>(off),
                                                             static_cast<std::size_t>(len),
                                                             base.with_rate(job.rate()));
            if (job.kind == DecoderKind::PolarOnly) {
                const PolarCode& code = *job.polar;
                std::vector<std::uint8_t> msg(code.k());
                for (auto& b : msg) b = static_cast<std::uint8_t>(rng() & 1);
                auto x = polar_encode(code, msg);
                auto soft = ch.transmit(x, rng);
                ScDecoder dec(code, soft);
                auto res = dec.decode_all();
                row.recovered = res.info == msg;
                if (len > 0) {
                    // largest aligned window 2^q inside the burst
                    for (int qq = code.s; qq >= 0 && !row.lr_one_fired; --qq) {
                        long w = 1L << qq;
                        long j = (off + w - 1) / w; // first aligned boundary at or after off
                        if (j * w + w > off + len) continue;
                        long stride = code.n >> qq;
                        bool all_zero = true;
                        for (long l = 0; l < w; ++l)
                            if (dec.soft_values()[static_cast<size_t>(l) * stride] != 0.0) {
                                all_zero = false;
                                break;
                            }
                        row.lr_one_fired = all_zero;
                        break; // only the largest q is checked
                    }
                }
            } else {
                const ConcatCode& code = *job.concat;
                std::vector<std::uint8_t> msg(code.message_bits());
                for (auto& b : msg) b = static_cast<std::uint8_t>(rng() & 1);
                auto frame = concat_encode(code, msg);
                auto soft = ch.transmit(frame, rng);
                auto res = joint_decode(code, job.mode, soft);
                row.recovered = res.message == msg;
            }
            table.push_back(row);
        }
    }
    return table;
}

} // namespace rspolar
