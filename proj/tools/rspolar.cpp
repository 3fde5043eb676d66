// rspolar command line: code construction (design), Monte Carlo block error
// rate runs (simulate), erasure-burst experiments (burst) and closed-form
// bound reports (bounds).
#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "rspolar/bounds.hpp"
#include "rspolar/channel.hpp"
#include "rspolar/concat.hpp"
#include "rspolar/polar.hpp"
#include "rspolar/sim.hpp"
#include "rspolar/spec_io.hpp"
#include "rspolar/version.hpp"

using namespace rspolar;

namespace {

int int_log2(long n) {
    int s = 0;
    while ((1L << s) < n) ++s;
    if ((1L << s) != n) throw CLI::ValidationError("--n must be a power of two");
    return s;
}

// Bit-channel error estimates for the design channel: exact z/2 on the BEC,
// genie-aided Monte Carlo otherwise.
BitChannelQuality design_quality(int s, const ChannelModel& channel, long trials,
                                 std::uint64_t seed) {
    if (channel.kind == ChannelModel::Kind::Bec) {
        BitChannelQuality q;
        q.z = bec_bit_channels(s, channel.p);
        q.p.reserve(q.z.size());
        for (double z : q.z) q.p.push_back(z / 2.0);
        return q;
    }
    return mc_bitchannel_estimate(s, channel, trials, seed);
}

int cmd_design(int n, int t, double rate, double fep, int k, const std::string& channel_str,
               long trials, std::uint64_t seed, const std::string& out, bool polar_only,
               int k_min, int k_max, int k_step, bool allow_zero_tau) {
    const int s = int_log2(n);
    ChannelModel design_ch = parse_channel(channel_str);

    CodeSpecFile spec;
    if (polar_only) {
        if (k <= 0) throw CLI::ValidationError("--polar-only needs --k");
        auto quality = design_quality(s, design_ch.with_rate(static_cast<double>(k) / n), trials, seed);
        PolarCode code(s, select_info_set(quality.values(), k));
        code.quality = quality;
        spec = CodeSpecFile::from_polar(code, {channel_str, trials, seed});
    } else if (rate > 0.0) {
        if (t == 0) throw CLI::ValidationError("--rate design needs --t");
        auto quality = design_quality(s, design_ch.with_rate(rate), trials, seed);
        if (k_min == 0) k_min = t;
        if (k_max == 0) k_max = n;
        if (k_step == 0) k_step = t;
        std::vector<int> ks;
        for (int kk = k_min; kk <= k_max; kk += k_step) ks.push_back(kk);
        auto res = rate_targeted_design(quality, s, t, rate, ks, 0, 0.005, allow_zero_tau);
        std::cerr << "design: k=" << res.code.polar.k() << " rate=" << res.achieved_rate
                  << " predicted_fep=" << res.predicted_fep << "\n";
        spec = CodeSpecFile::from_concat(res.code, {channel_str, trials, seed});
    } else {
        if (t == 0 || k <= 0) throw CLI::ValidationError("--fep design needs --t and --k");
        if (k % t != 0) throw CLI::ValidationError("--k must be divisible by --t");
        if (design_ch.kind == ChannelModel::Kind::AwgnBpsk && std::isnan(design_ch.code_rate))
            throw CLI::ValidationError("--fep over awgn needs an explicit rate=<R> in the channel");
        auto quality = design_quality(s, design_ch, trials, seed);
        PolarCode inner(s, select_info_set(quality.values(), k));
        inner.quality = quality;
        auto profile = symbol_error_profile(quality.values(), inner.info_set, t);
        const Field& f = Field::get(t);
        auto taus = rate_adaptive_design(profile, f.order(), t, k, fep, allow_zero_tau);
        ConcatCode code(std::move(inner), f, taus);
        std::cerr << "design: k=" << k << " rate=" << code.total_rate()
                  << " predicted_fep=" << predicted_fep(taus, profile, f.order()) << "\n";
        spec = CodeSpecFile::from_concat(code, {channel_str, trials, seed});
    }
    save_spec(spec, out);
    std::cerr << "design: wrote " << out << " (hash " << spec_hash(spec) << ")\n";
    return 0;
}

int cmd_simulate(const std::string& spec_path, const std::string& channel_str,
                 const std::string& decoder, const std::vector<double>& points, long max_frames,
                 long min_errors, std::uint64_t seed, int workers, const std::string& out) {
    auto spec = load_spec(spec_path);
    ChannelModel channel = parse_channel(channel_str);

    SimConfig cfg;
    cfg.channel = channel;
    cfg.points = points;
    cfg.stop = {max_frames, min_errors};
    cfg.seed = seed;
    cfg.workers = workers;

    SimReport report;
    PolarCode polar = spec.polar;
    ConcatCode concat;
    SimJob job;
    if (decoder == "polar-only") {
        job = SimJob::polar_only(polar);
    } else {
        concat = spec.to_concat();
        JointDecodeMode mode;
        if (decoder == "sc") mode = JointDecodeMode::Sc;
        else if (decoder == "sc-gmd") mode = JointDecodeMode::ScGmd;
        else if (decoder == "sc-gmd-aml") mode = JointDecodeMode::ScGmdAml;
        else if (decoder == "sc-gmd-ml") mode = JointDecodeMode::ScGmdMl;
        else throw CLI::ValidationError("unknown decoder '" + decoder + "'");
        job = SimJob::joint(concat, mode);
    }
    report = run_bler(job, cfg);
    report.spec_hash = spec_hash(spec);
    report.version = kVersion;

    std::string csv = report_csv(report);
    if (out.empty() || out == "-") {
        std::cout << csv;
    } else {
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot open '" + out + "'");
        f << csv;
        std::cerr << "simulate: wrote " << out << " (spec " << report.spec_hash << ", seed "
                  << report.seed << ")\n";
    }
    for (const auto& p : report.points)
        if (p.inner_codewords > 0)
            std::cerr << "simulate: point " << p.point << " inner codeword error rate "
                      << static_cast<double>(p.inner_codeword_errors) / p.inner_codewords << "\n";
    return 0;
}

std::vector<long> parse_long_list(const std::vector<std::string>& raw, long spread_max) {
    std::vector<long> out;
    for (const auto& item : raw) {
        if (item.rfind("spread:", 0) == 0) {
            long count = std::stol(item.substr(7));
            if (count < 1 || spread_max < 0)
                throw CLI::ValidationError("bad spread specification");
            for (long i = 0; i < count; ++i)
                out.push_back(count == 1 ? 0 : i * spread_max / (count - 1));
        } else {
            out.push_back(std::stol(item));
        }
    }
    return out;
}

int cmd_burst(const std::string& spec_path, const std::vector<std::string>& lengths_raw,
              const std::vector<std::string>& offsets_raw, const std::string& decoder,
              std::uint64_t seed) {
    auto spec = load_spec(spec_path);
    PolarCode polar = spec.polar;
    ConcatCode concat;
    SimJob job;
    if (spec.is_concat() && decoder != "polar-only") {
        concat = spec.to_concat();
        JointDecodeMode mode = JointDecodeMode::Sc;
        if (decoder == "sc-gmd") mode = JointDecodeMode::ScGmd;
        else if (decoder == "sc-gmd-aml") mode = JointDecodeMode::ScGmdAml;
        else if (decoder == "sc-gmd-ml") mode = JointDecodeMode::ScGmdMl;
        job = SimJob::joint(concat, mode);
    } else {
        job = SimJob::polar_only(polar);
    }
    auto lengths = parse_long_list(lengths_raw, 0);
    std::vector<long> offsets;
    long max_len = 0;
    for (long l : lengths) max_len = std::max(max_len, l);
    offsets = parse_long_list(offsets_raw, job.frame_bits() - max_len);

    auto table = run_burst_experiment(job, lengths, offsets, seed);
    std::cout << "length,offset,recovered,lr_one_fired\n";
    long failures = 0;
    for (const auto& row : table) {
        std::cout << row.length << ',' << row.offset << ',' << (row.recovered ? 1 : 0) << ','
                  << (row.lr_one_fired ? 1 : 0) << '\n';
        if (!row.recovered) ++failures;
    }
    std::cerr << "burst: " << table.size() << " trials, " << failures << " failures\n";
    return 0;
}

nlohmann::json lemma1_json(const Lemma1Bound& b) {
    return {{"exponent", b.exponent}, {"probability", b.probability}, {"vacuous", b.vacuous}};
}

int cmd_bounds(const std::string& spec_path, double n, double m, double ro, double eps,
               double total_n, double pe, double ri) {
    nlohmann::json j;
    j["version"] = kVersion;
    if (!spec_path.empty()) {
        auto spec = load_spec(spec_path);
        j["spec_hash"] = spec_hash(spec);
        j["n"] = spec.polar.n;
        n = spec.polar.n;
        j["failure_threshold_bits"] = burst_failure_threshold(spec.polar.n);
        if (spec.is_concat()) {
            auto code = spec.to_concat();
            j["m"] = code.m;
            int dmin = code.outer[0].min_distance();
            for (const auto& c : code.outer) dmin = std::min(dmin, c.min_distance());
            j["min_outer_distance"] = dmin;
            j["recovery_limit_bits"] = burst_recovery_limit(dmin, code.n());
            double sum_ro = 0;
            for (const auto& c : code.outer) sum_ro += static_cast<double>(c.kappa()) / code.m;
            ro = sum_ro / code.r;
            m = code.m;
            j["mean_outer_rate"] = ro;
            j["total_rate"] = code.total_rate();
        }
        ChannelModel design = spec.design.channel.empty() ? ChannelModel::noiseless()
                                                          : parse_channel(spec.design.channel);
        if (design.kind == ChannelModel::Kind::Bec && spec.design.channel.size()) {
            auto z = bec_bit_channels(spec.polar.s, design.p);
            j["union_bound"] = union_bound(z, spec.polar.info_set);
        }
    }
    if (n > 0 && m > 0 && ro > 0 && eps > 0)
        j["lemma1"] = lemma1_json(lemma1_bound(n, m, ro, eps));
    if (total_n > 0 && eps > 0) {
        auto p = theorem1_params(total_n, eps);
        j["theorem1"] = {{"n_exact", p.n_exact},     {"m_exact", p.m_exact},
                         {"outer_rate", p.outer_rate}, {"n_rounded", p.n_rounded},
                         {"m_rounded", p.m_rounded},   {"feasible", p.feasible}};
        if (p.feasible)
            j["theorem1"]["lemma1_at_params"] =
                lemma1_json(lemma1_bound(p.n_exact, p.m_exact, p.outer_rate, eps));
    }
    if (pe >= 0 && n > 0 && m > 0 && ro > 0 && ri > 0) {
        int mm = static_cast<int>(m);
        int tau = static_cast<int>(std::floor((1.0 - ro) * mm / 2.0));
        int r = static_cast<int>(std::floor(n * ri / std::log2(m)));
        j["optimistic_lower_bound"] = optimistic_lower_bound(mm, r * tau, pe);
    }
    if (n > 0 && j.find("failure_threshold_bits") == j.end())
        j["failure_threshold_bits"] = burst_failure_threshold(static_cast<long>(n));
    std::cout << j.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"interleaved RS-polar concatenated FEC toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // design
    auto* design = app.add_subcommand("design", "construct a code spec and write it as JSON");
    int d_n = 512, d_t = 0, d_k = 0, d_kmin = 0, d_kmax = 0, d_kstep = 0;
    double d_rate = 0.0, d_fep = 0.0;
    long d_trials = 100000;
    std::uint64_t d_seed = 1;
    std::string d_channel = "bec:0.5", d_out = "spec.json";
    bool d_polar_only = false;
    design->add_option("--n", d_n, "inner polar length (power of two)")->required();
    design->add_option("--t", d_t, "outer symbol width in bits (0 = polar-only)");
    design->add_option("--rate", d_rate, "target total rate (rate-targeted design)");
    design->add_option("--fep", d_fep, "target frame error probability (rate-adaptive design)");
    design->add_option("--k", d_k, "inner information length (with --fep or --polar-only)");
    design->add_option("--design-channel", d_channel, "channel the construction is designed for")
        ->required();
    design->add_option("--trials", d_trials, "genie estimation trials");
    design->add_option("--seed", d_seed, "genie estimation seed");
    design->add_option("--out", d_out, "output spec path")->required();
    design->add_flag("--polar-only", d_polar_only, "build a bare polar spec");
    bool d_zero_tau = false;
    design->add_flag("--allow-zero-tau", d_zero_tau,
                     "permit unprotected (rate-1) outer codes on the strongest groups");
    design->add_option("--k-min", d_kmin, "rate design: smallest k to try");
    design->add_option("--k-max", d_kmax, "rate design: largest k to try");
    design->add_option("--k-step", d_kstep, "rate design: k increment");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo BLER over an operating-point grid");
    std::string s_spec, s_channel, s_decoder = "sc", s_out;
    std::vector<double> s_points;
    long s_max_frames = 1000000, s_min_errors = 100;
    std::uint64_t s_seed = 1;
    int s_workers = 0;
    sim->add_option("--spec", s_spec, "code spec JSON")->required();
    sim->add_option("--channel", s_channel, "channel descriptor")->required();
    sim->add_option("--decoder", s_decoder, "sc|sc-gmd|sc-gmd-aml|sc-gmd-ml|polar-only");
    sim->add_option("--points", s_points, "operating points (AWGN Eb/N0 dB, BSC/BEC parameter)")
        ->delimiter(',');
    sim->add_option("--max-frames", s_max_frames, "frame cap per point");
    sim->add_option("--min-errors", s_min_errors, "stop after this many frame errors");
    sim->add_option("--seed", s_seed, "master seed");
    sim->add_option("--workers", s_workers, "worker threads (0 = hardware)");
    sim->add_option("--out", s_out, "results CSV path (default stdout)");

    // burst
    auto* burst = app.add_subcommand("burst", "deterministic erasure-burst table");
    std::string b_spec, b_decoder = "sc";
    std::vector<std::string> b_lengths, b_offsets;
    std::uint64_t b_seed = 1;
    burst->add_option("--spec", b_spec, "code spec JSON")->required();
    burst->add_option("--lengths", b_lengths, "burst lengths (or spread:K)")
        ->required()
        ->delimiter(',');
    burst->add_option("--offsets", b_offsets, "burst offsets (or spread:K)")
        ->required()
        ->delimiter(',');
    burst->add_option("--decoder", b_decoder, "sc|sc-gmd|sc-gmd-aml|sc-gmd-ml|polar-only");
    burst->add_option("--seed", b_seed, "message seed");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "closed-form bound report as JSON");
    std::string o_spec;
    double o_n = 0, o_m = 0, o_ro = 0, o_eps = 0, o_N = 0, o_pe = -1, o_ri = 0;
    bounds->add_option("--spec", o_spec, "code spec JSON");
    bounds->add_option("--n", o_n, "inner code length");
    bounds->add_option("--m", o_m, "outer code length");
    bounds->add_option("--ro", o_ro, "outer code rate");
    bounds->add_option("--eps", o_eps, "epsilon parameter");
    bounds->add_option("--N", o_N, "total length for the decay parameterization");
    bounds->add_option("--pe", o_pe, "inner block error probability (lower bound)");
    bounds->add_option("--ri", o_ri, "inner code rate (lower bound)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*design)
            return cmd_design(d_n, d_t, d_rate, d_fep, d_k, d_channel, d_trials, d_seed, d_out,
                              d_polar_only, d_kmin, d_kmax, d_kstep, d_zero_tau);
        if (*sim)
            return cmd_simulate(s_spec, s_channel, s_decoder, s_points, s_max_frames, s_min_errors,
                                s_seed, s_workers, s_out);
        if (*burst) return cmd_burst(b_spec, b_lengths, b_offsets, b_decoder, b_seed);
        if (*bounds) return cmd_bounds(o_spec, o_n, o_m, o_ro, o_eps, o_N, o_pe, o_ri);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
