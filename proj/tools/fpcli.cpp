// fpcli: sketch turnstile streams, estimate F_p, merge sketch files, run
// failure-probability benchmarks, and run the lower-bound distinguishing
// experiment.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpsketch/config.hpp"
#include "fpsketch/fp_sketch.hpp"
#include "fpsketch/generators.hpp"
#include "fpsketch/harness.hpp"
#include "fpsketch/oracle.hpp"
#include "fpsketch/stream_io.hpp"

namespace {

// Exit codes: parse errors, config rejections and recovery failures are
// distinguishable for scripting.
constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitParse = 2;
constexpr int kExitConfig = 3;
constexpr int kExitRecovery = 4;

using json = nlohmann::json;
using namespace fpsketch;

struct CommonFlags {
    uint64_t n = 1 << 14;
    double p = 3.0;
    double eps = 0.25;
    double delta = 0.1;
    uint64_t seed = 1;
    double c_mult = 1.0;
    double s_mult = 1.0;
    double h_mult = 1.0;
    double w_mult = 1.0;
    double f2_mult = 1.0;
    std::string shelves = "auto";
    bool exact_f2 = false;
    bool prf_hash = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--n", f.n, "domain size");
    cmd->add_option("--p", f.p, "moment order (p > 2)");
    cmd->add_option("--eps", f.eps, "multiplicative accuracy");
    cmd->add_option("--delta", f.delta, "failure probability");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--c-mult", f.c_mult, "multiplier on the table height C");
    cmd->add_option("--s-mult", f.s_mult, "multiplier on the row count s");
    cmd->add_option("--h-mult", f.h_mult, "multiplier on shelf heights");
    cmd->add_option("--w-mult", f.w_mult, "multiplier on shelf widths");
    cmd->add_option("--f2-mult", f.f2_mult, "multiplier on the F2 bank size");
    cmd->add_option("--shelves", f.shelves, "shelf structure: auto|on|off")
        ->check(CLI::IsMember({"auto", "on", "off"}));
    cmd->add_flag("--exact-f2", f.exact_f2, "two-pass mode: use the exact F2 of the stream");
    cmd->add_flag("--prf-hash", f.prf_hash, "full-randomness PRF hashing (fast mode)");
}

FpConfig make_config(const CommonFlags& f) {
    ConfigOverrides opts;
    opts.c_C = f.c_mult;
    opts.c_s = f.s_mult;
    opts.c_H = f.h_mult;
    opts.c_w = f.w_mult;
    opts.c_F2 = f.f2_mult;
    opts.exact_f2 = f.exact_f2;
    opts.prf_hash = f.prf_hash;
    if (f.shelves == "on") opts.shelves = ShelvesMode::On;
    if (f.shelves == "off") opts.shelves = ShelvesMode::Off;
    return config_derive(f.n, f.p, f.eps, f.delta, opts);
}

json config_json(const FpConfig& cfg) {
    json j;
    j["n"] = cfg.n;
    j["p"] = cfg.p;
    j["eps"] = cfg.eps;
    j["delta"] = cfg.delta;
    j["eps_bar"] = cfg.eps_bar;
    j["alpha"] = cfg.alpha;
    j["C"] = cfg.C;
    j["B"] = cfg.B;
    j["L"] = cfg.L;
    j["s"] = cfg.s;
    j["q"] = cfg.q;
    j["k"] = cfg.k;
    j["J"] = cfg.shelf.J;
    j["shelves_enabled"] = cfg.shelves_enabled;
    auto rep = measurement_report(cfg);
    j["measurements"] = {{"ghss", rep.cells_ghss},
                         {"shelf", rep.cells_shelf},
                         {"f2", rep.cells_f2},
                         {"total", rep.total},
                         {"baseline_total", rep.baseline_total}};
    return j;
}

json estimate_json(const FpEstimate& est) {
    json j;
    j["fp"] = est.fp;
    j["fp_shelf"] = est.fp_shelf;
    j["fp_ghss"] = est.fp_ghss;
    j["f2hat"] = est.f2hat;
    j["recovered_count"] = est.recovered_count;
    j["discovered_shelf"] = est.discovered_shelf;
    j["discovered_level"] = est.discovered_level;
    j["discovered_last_level"] = est.discovered_last_level;
    j["dropped_nocollision"] = est.dropped_nocollision;
    j["dropped_band"] = est.dropped_band;
    j["dropped_coin"] = est.dropped_coin;
    j["not_discovered"] = est.not_discovered;
    return j;
}

int cmd_sketch(const CommonFlags& flags, const std::string& stream_path, const std::string& out_path) {
    FpConfig cfg = make_config(flags);
    FpSketch sketch(cfg, flags.seed);
    auto updates = read_stream_file(stream_path);
    sketch.ingest(updates);
    write_bytes(out_path, sketch.serialize());
    std::cout << "sketched " << updates.size() << " updates into " << out_path << "\n";
    return kExitOk;
}

int cmd_estimate(const std::vector<std::string>& sketch_paths, const std::string& stream_path,
                 bool json_out) {
    auto bytes = read_bytes(sketch_paths.front());
    FpSketch sketch = FpSketch::deserialize(bytes);
    for (size_t i = 1; i < sketch_paths.size(); ++i) {
        FpSketch other = FpSketch::deserialize(read_bytes(sketch_paths[i]));
        sketch.merge(other);
    }
    std::optional<double> exact_f2;
    if (!stream_path.empty()) {
        auto updates = read_stream_file(stream_path);
        auto x = oracle::accumulate_stream(updates, sketch.config().n);
        exact_f2 = oracle::exact_f2_res(x, 0);
    } else if (sketch.config().opts.exact_f2) {
        throw ConfigError("sketch was built in exact-f2 mode; pass the stream file for the second pass");
    }
    FpEstimate est = sketch.estimate(exact_f2);
    if (json_out) {
        json j = estimate_json(est);
        j["config"] = config_json(sketch.config());
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout.precision(17);
        std::cout << est.fp << "\n";
    }
    return kExitOk;
}

HardInstanceSpec make_spec(const CommonFlags& flags, const std::string& kind, double zipf_s,
                           uint64_t spike_m, double spike_mag, double sigma, uint64_t largeish_t,
                           double largeish_scale) {
    HardInstanceSpec spec;
    spec.n = flags.n;
    spec.p = flags.p;
    spec.eps = flags.eps;
    spec.seed = flags.seed;
    if (kind == "zipf") {
        spec.kind = InstanceKind::Zipf;
        spec.zipf_s = zipf_s;
    } else if (kind == "spike") {
        spec.kind = InstanceKind::Spike;
        spec.spike_count = spike_m;
        spec.spike_magnitude = spike_mag > 0 ? spike_mag : std::pow(double(flags.n), 1.0 / flags.p);
        spec.noise_sigma = sigma;
    } else if (kind == "largeish") {
        spec.kind = InstanceKind::Largeish;
        spec.largeish_t = largeish_t ? largeish_t
                                     : std::max<uint64_t>(1, (uint64_t)std::ceil(std::log2(1.0 / flags.delta)));
        spec.largeish_scale = largeish_scale;
    } else {
        throw ConfigError("unknown instance kind: " + kind);
    }
    return spec;
}

int cmd_bench(const CommonFlags& flags, const HardInstanceSpec& spec, uint64_t trials,
              uint32_t parallelism, const std::string& csv_path, bool json_out) {
    FpConfig cfg = make_config(flags);
    TrialStats stats = run_trials(cfg, spec, trials, parallelism, flags.seed);
    if (!csv_path.empty()) write_trials_csv(csv_path, stats);
    json j;
    j["instance"] = instance_kind_name(spec.kind);
    j["trials"] = stats.trials;
    j["failures"] = stats.failures;
    j["failure_rate"] = stats.failure_rate();
    j["rel_error_p50"] = stats.p50;
    j["rel_error_p90"] = stats.p90;
    j["rel_error_p99"] = stats.p99;
    j["wall_seconds"] = stats.wall_seconds;
    j["config"] = config_json(cfg);
    if (json_out) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "trials=" << stats.trials << " failures=" << stats.failures
                  << " rate=" << stats.failure_rate() << " p50=" << stats.p50 << " p90=" << stats.p90
                  << " p99=" << stats.p99 << " wall=" << stats.wall_seconds << "s\n";
    }
    return kExitOk;
}

int cmd_lbexp(uint64_t n, uint32_t r, double p, double eps, double delta, uint64_t trials,
              uint64_t seed, double cprime, bool json_out) {
    LbReport rep = lb_distinguish(n, r, p, eps, delta, trials, seed, cprime);
    if (json_out) {
        json j;
        j["n"] = rep.n;
        j["r"] = rep.r;
        j["t"] = rep.t;
        j["samples"] = rep.samples;
        j["advantage"] = rep.advantage;
        j["separation_fraction"] = rep.separation_fraction;
        j["e_nt"] = rep.e_nt;
        j["spike_value"] = rep.spike_value;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "n=" << rep.n << " r=" << rep.r << " t=" << rep.t << " advantage=" << rep.advantage
                  << " separation=" << rep.separation_fraction << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"F_p (p > 2) linear-sketch toolkit"};
    app.require_subcommand(1);

    CommonFlags flags;

    auto* sk = app.add_subcommand("sketch", "ingest a text stream into a sketch file");
    std::string stream_path, out_path;
    add_common(sk, flags);
    sk->add_option("--stream", stream_path, "input stream file ('i v' lines)")->required();
    sk->add_option("--out", out_path, "output sketch file")->required();

    auto* es = app.add_subcommand("estimate", "estimate F_p from sketch file(s); multiple files merge");
    std::vector<std::string> sketch_paths;
    std::string est_stream;
    bool est_json = false;
    es->add_option("--sketch", sketch_paths, "sketch file(s) to load and merge")->required();
    es->add_option("--stream", est_stream, "stream file for exact-F2 two-pass mode");
    es->add_flag("--json", est_json, "print diagnostics JSON");

    auto* be = app.add_subcommand("bench", "measure empirical failure probability on an instance");
    std::string kind = "zipf", csv_path;
    double zipf_s = 1.1, spike_mag = 0.0, sigma = 0.0, largeish_scale = 1.0;
    uint64_t spike_m = 4, largeish_t = 0, trials = 100;
    uint32_t parallelism = 1;
    bool bench_json = false;
    add_common(be, flags);
    be->add_option("--instance", kind, "zipf|spike|largeish")
        ->check(CLI::IsMember({"zipf", "spike", "largeish"}));
    be->add_option("--zipf-s", zipf_s, "zipf exponent");
    be->add_option("--spike-m", spike_m, "spike count");
    be->add_option("--spike-mag", spike_mag, "spike magnitude (default n^{1/p})");
    be->add_option("--sigma", sigma, "gaussian noise level");
    be->add_option("--largeish-t", largeish_t, "large-ish spike count (default ceil(log2(1/delta)))");
    be->add_option("--largeish-scale", largeish_scale, "large-ish magnitude multiplier");
    be->add_option("--trials", trials, "number of trials");
    be->add_option("--parallelism", parallelism, "worker threads");
    be->add_option("--csv", csv_path, "per-trial CSV output path");
    be->add_flag("--json", bench_json, "print summary JSON");

    auto* lb = app.add_subcommand("lbexp", "lower-bound distinguishing experiment");
    uint64_t lb_n = 128, lb_trials = 2000, lb_seed = 1;
    uint32_t lb_r = 128;
    double lb_p = 3.0, lb_eps = 0.5, lb_delta = 0.01, lb_cprime = 4.0;
    bool lb_json = false;
    lb->add_option("--n", lb_n, "ambient dimension (small)");
    lb->add_option("--r", lb_r, "sketching dimension (rows of S)");
    lb->add_option("--p", lb_p, "moment order");
    lb->add_option("--eps", lb_eps, "accuracy parameter of the hard pair");
    lb->add_option("--delta", lb_delta, "failure probability (sets t)");
    lb->add_option("--trials", lb_trials, "sample pairs");
    lb->add_option("--seed", lb_seed, "seed");
    lb->add_option("--cprime", lb_cprime, "the constant C' in the beta spikes");
    lb->add_flag("--json", lb_json, "print JSON");

    try {
        app.parse(argc, argv);
        if (sk->parsed()) return cmd_sketch(flags, stream_path, out_path);
        if (es->parsed()) return cmd_estimate(sketch_paths, est_stream, est_json);
        if (be->parsed()) {
            HardInstanceSpec spec =
                make_spec(flags, kind, zipf_s, spike_m, spike_mag, sigma, largeish_t, largeish_scale);
            return cmd_bench(flags, spec, trials, parallelism, csv_path, bench_json);
        }
        if (lb->parsed()) {
            return cmd_lbexp(lb_n, lb_r, lb_p, lb_eps, lb_delta, lb_trials, lb_seed, lb_cprime, lb_json);
        }
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    } catch (const fpsketch::ParseError& e) {
        std::cerr << "parse error";
        if (e.line_number > 0) std::cerr << " at line " << e.line_number;
        std::cerr << ": " << e.what() << "\n";
        return kExitParse;
    } catch (const fpsketch::RecoveryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRecovery;
    } catch (const fpsketch::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}
