#include "topoprint/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "io_util.hpp"
#include "topoprint/fingerprint.hpp"
#include "topoprint/matching.hpp"
#include "topoprint/obfuscate.hpp"
#include "topoprint/wav_io.hpp"

namespace topo {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Shared option bundles

struct ConfigOpts {
    double omega = 1.0;
    double tau = 0.4;
    int betti_res = 256;
    int nmels = 128;
    int nfft = 1024;
    int hop = 256;
};

FingerprintConfig make_config(const ConfigOpts& o, double lambda) {
    FingerprintConfig cfg;
    cfg.window_seconds = o.omega;
    cfg.overlap = o.tau;
    cfg.lambda = lambda;
    cfg.betti_resolution = o.betti_res;
    cfg.stft.n_mels = o.nmels;
    cfg.stft.window_size = o.nfft;
    cfg.stft.hop = o.hop;
    return cfg;
}

const CLI::Validator kTauRange(
    [](std::string& s) -> std::string {
        try {
            const double v = std::stod(s);
            if (v >= 0.0 && v < 1.0) return {};
        } catch (...) {
        }
        return "overlap must lie in [0, 1)";
    },
    "FLOAT in [0, 1)");

void add_config_flags(CLI::App* cmd, ConfigOpts& o) {
    cmd->add_option("--omega", o.omega, "window length in seconds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--tau", o.tau, "window overlap fraction, in [0, 1)")
        ->check(kTauRange)
        ->capture_default_str();
    cmd->add_option("--betti-res", o.betti_res, "Betti curve resolution")
        ->check(CLI::Range(2, 1 << 20))
        ->capture_default_str();
    cmd->add_option("--nmels", o.nmels, "mel filter count")
        ->check(CLI::Range(2, 1 << 14))
        ->capture_default_str();
    cmd->add_option("--nfft", o.nfft, "STFT window size in samples")
        ->check(CLI::Range(2, 1 << 20))
        ->capture_default_str();
    cmd->add_option("--hop", o.hop, "STFT hop in samples")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

int threads_from_env() {
    int n = int(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("TOPOPRINT_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) n = int(std::min<long>(n, v));
    }
    return n;
}

bool has_extension(const std::string& path, const std::string& ext) {
    std::string e = fs::path(path).extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e == ext;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

// ---------------------------------------------------------------------------
// Manifest CSV (headerful; quoted fields with "" escapes)

struct ManifestRow {
    std::string path_a, path_b, label, obfuscation;
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::vector<ManifestRow> read_manifest(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("manifest is empty: " + path);
    auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "path_a" || header[1] != "path_b" ||
        header[2] != "label")
        throw std::runtime_error("manifest header must be path_a,path_b,label[,obfuscation]");

    std::vector<ManifestRow> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() < 3)
            throw std::runtime_error("manifest row has fewer than 3 fields: " + line);
        ManifestRow r;
        r.path_a = fields[0];
        r.path_b = fields[1];
        r.label = fields[2];
        if (fields.size() > 3) r.obfuscation = fields[3];
        if (r.label != "positive" && r.label != "negative")
            throw std::runtime_error("manifest label must be positive or negative, got: " +
                                     r.label);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw std::runtime_error("manifest has no data rows: " + path);
    return rows;
}

// ---------------------------------------------------------------------------
// Input loading

Fingerprint fingerprint_of_path(const std::string& path, const FingerprintConfig& cfg) {
    if (has_extension(path, ".json")) return read_fingerprint(path);
    if (has_extension(path, ".wav")) return fingerprint_track(load_wav(path), cfg);
    throw std::runtime_error("expected a .wav or .json input, got: " + path);
}

// ---------------------------------------------------------------------------
// Subcommands

struct FingerprintOpts {
    std::string input, output;
    ConfigOpts cfg;
};

int do_fingerprint(const FingerprintOpts& o) {
    Fingerprint fp = fingerprint_track(load_wav(o.input), make_config(o.cfg, kDefaultLambda));
    write_fingerprint(fp, o.output);
    std::cout << "wrote " << o.output << " (" << fp.entries.size() << " entries)\n";
    return 0;
}

struct CompareOpts {
    std::string a, b, dump_pairs;
    double lambda = kDefaultLambda;
    double kappa = kDefaultKappa;
    int smooth_k = kDefaultSmoothK;
    ConfigOpts cfg;
};

int do_compare(const CompareOpts& o) {
    const bool a_json = has_extension(o.a, ".json");
    const bool b_json = has_extension(o.b, ".json");
    Fingerprint fa, fb;
    if (a_json || b_json) {
        // A stored fingerprint pins the configuration for the other side.
        if (a_json) {
            fa = read_fingerprint(o.a);
            fb = b_json ? read_fingerprint(o.b) : fingerprint_track(load_wav(o.b), fa.config);
        } else {
            fb = read_fingerprint(o.b);
            fa = fingerprint_track(load_wav(o.a), fb.config);
        }
    } else {
        const FingerprintConfig cfg = make_config(o.cfg, o.lambda);
        fa = fingerprint_track(load_wav(o.a), cfg);
        fb = fingerprint_track(load_wav(o.b), cfg);
    }

    MatchResult res = compare_fingerprints(fa, fb, o.lambda, o.smooth_k, o.kappa);

    ordered_json out;
    out["error"] = res.error;
    out["rho"] = res.rho;
    out["n_pairs"] = res.pairs.size();
    out["decision"] = res.positive ? "positive" : "negative";
    out["kappa"] = o.kappa;
    out["lambda"] = o.lambda;
    std::cout << out.dump() << "\n";

    if (!o.dump_pairs.empty()) {
        std::ostringstream csv;
        csv << "t_i,t_j,t_j_smoothed\n";
        for (size_t i = 0; i < res.pairs.size(); ++i)
            csv << format_double(res.pairs[i].first) << ',' << format_double(res.pairs[i].second)
                << ',' << format_double(res.smoothed[i].second) << '\n';
        atomic_write(o.dump_pairs, csv.str());
    }
    return res.positive ? 0 : 1;
}

struct ObfuscateOpts {
    std::string input, output, kind;
    double degree = 0.0;
    uint64_t seed = 0;
};

int do_obfuscate(const ObfuscateOpts& o) {
    ObfuscationSpec spec{obfuscation_kind_from_string(o.kind), o.degree};
    Waveform w = obfuscate(load_wav(o.input), spec, o.seed);
    save_wav(w, o.output);
    std::cout << "wrote " << o.output << " (" << format_double(w.duration()) << " s)\n";
    return 0;
}

struct EvaluateOpts {
    std::string manifest;
    std::string out_dir = ".";
    double lambda = kDefaultLambda;
    double kappa = kDefaultKappa;
    int smooth_k = kDefaultSmoothK;
    double fpr_target = 0.01;
    ConfigOpts cfg;
};

int do_evaluate(const EvaluateOpts& o) {
    const auto rows = read_manifest(o.manifest);
    const FingerprintConfig cfg = make_config(o.cfg, o.lambda);

    // Fingerprint every distinct path once, in parallel.
    std::vector<std::string> paths;
    std::map<std::string, size_t> index;
    for (const auto& r : rows)
        for (const std::string& p : {r.path_a, r.path_b})
            if (index.emplace(p, paths.size()).second) paths.push_back(p);

    std::vector<Fingerprint> prints(paths.size());
    {
        std::atomic<size_t> next{0};
        std::mutex err_mutex;
        std::exception_ptr first_error;
        const int n_threads = std::min<int>(threads_from_env(), int(paths.size()));
        std::vector<std::thread> workers;
        for (int t = 0; t < n_threads; ++t) {
            workers.emplace_back([&] {
                for (;;) {
                    const size_t i = next.fetch_add(1);
                    if (i >= paths.size()) return;
                    try {
                        prints[i] = fingerprint_of_path(paths[i], cfg);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(err_mutex);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& w : workers) w.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    std::vector<LabeledPair> pairs;
    pairs.reserve(rows.size());
    for (const auto& r : rows)
        pairs.push_back({&prints[index.at(r.path_a)], &prints[index.at(r.path_b)],
                         r.label == "positive"});

    BatchMetrics m = classify_batch(pairs, o.kappa, o.lambda, o.smooth_k, o.fpr_target);

    fs::create_directories(o.out_dir);
    const fs::path dir(o.out_dir);

    std::ostringstream scores;
    scores << "path_a,path_b,label,obfuscation,error,rho,n_pairs,decision\n";
    for (size_t i = 0; i < rows.size(); ++i) {
        const MatchResult& r = m.results[i];
        scores << csv_quote(rows[i].path_a) << ',' << csv_quote(rows[i].path_b) << ','
               << rows[i].label << ',' << csv_quote(rows[i].obfuscation) << ','
               << format_double(r.error) << ',' << format_double(r.rho) << ',' << r.pairs.size()
               << ',' << (r.positive ? "positive" : "negative") << '\n';
    }
    atomic_write((dir / "scores.csv").string(), scores.str());

    std::ostringstream roc;
    roc << "threshold,fpr,tpr\n";
    for (const RocPoint& p : m.roc)
        roc << format_double(p.threshold) << ',' << format_double(p.fpr) << ','
            << format_double(p.tpr) << '\n';
    atomic_write((dir / "roc.csv").string(), roc.str());

    // Per-group empirical CDF of errors over thresholds in [0, 2], mirroring
    // the grouped cumulative-distribution plots.
    std::map<std::string, std::vector<double>> groups;
    for (size_t i = 0; i < rows.size(); ++i) {
        std::string g = rows[i].label == "negative"
                            ? "negative"
                            : (rows[i].obfuscation.empty() ? "positive" : rows[i].obfuscation);
        groups[g].push_back(m.errors[i]);
    }
    std::ostringstream cum;
    cum << "group,threshold,cum_fraction\n";
    for (auto& [name, errs] : groups) {
        std::sort(errs.begin(), errs.end());
        for (int step = 0; step <= 200; ++step) {
            const double t = step * 0.01;
            const double frac =
                double(std::upper_bound(errs.begin(), errs.end(), t) - errs.begin()) /
                double(errs.size());
            cum << csv_quote(name) << ',' << format_double(t) << ',' << format_double(frac)
                << '\n';
        }
    }
    atomic_write((dir / "cumulative.csv").string(), cum.str());

    ordered_json mj;
    mj["kappa"] = m.kappa;
    mj["lambda"] = o.lambda;
    mj["smooth_k"] = o.smooth_k;
    mj["n_pairs"] = rows.size();
    mj["counts"] = {{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}};
    mj["accuracy"] = m.accuracy;
    mj["precision"] = m.precision;
    mj["recall"] = m.recall;
    mj["auc"] = m.auc;
    mj["fpr_target"] = m.fpr_target;
    mj["learned_kappa"] = m.learned_kappa;
    atomic_write((dir / "metrics.json").string(), mj.dump(2) + "\n");

    std::cout << mj.dump() << "\n";
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"topoprint: topological audio fingerprinting and matching"};
    app.require_subcommand(1);

    FingerprintOpts fo;
    auto* fp_cmd = app.add_subcommand("fingerprint", "Fingerprint a WAV file");
    fp_cmd->add_option("input", fo.input, "input WAV path")->required();
    fp_cmd->add_option("-o,--output", fo.output, "output fingerprint JSON path")->required();
    add_config_flags(fp_cmd, fo.cfg);

    CompareOpts co;
    auto* cmp_cmd = app.add_subcommand("compare", "Compare two tracks or fingerprints");
    cmp_cmd->add_option("a", co.a, "first input (.wav or .json)")->required();
    cmp_cmd->add_option("b", co.b, "second input (.wav or .json)")->required();
    cmp_cmd->add_option("--lambda", co.lambda, "dim-0 weight in the window cost")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmp_cmd->add_option("--kappa", co.kappa, "decision threshold on the error")
        ->capture_default_str();
    cmp_cmd->add_option("--smooth-k", co.smooth_k, "median smoothing half-width")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmp_cmd->add_option("--dump-pairs", co.dump_pairs, "write matched window times to a CSV");
    add_config_flags(cmp_cmd, co.cfg);

    ObfuscateOpts oo;
    auto* obf_cmd = app.add_subcommand("obfuscate", "Apply an obfuscation to a WAV file");
    obf_cmd->add_option("input", oo.input, "input WAV path")->required();
    obf_cmd->add_option("-o,--output", oo.output, "output WAV path")->required();
    obf_cmd
        ->add_option("--kind", oo.kind,
                     "one of white_noise, pink_noise, reverb, high_pass, low_pass, "
                     "tempo_shift, pitch_shift")
        ->required();
    obf_cmd->add_option("--degree", oo.degree, "degree (semantics depend on kind)")->required();
    obf_cmd->add_option("--seed", oo.seed, "seed for stochastic kinds")->capture_default_str();

    EvaluateOpts eo;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score labeled pairs from a manifest CSV");
    eval_cmd->add_option("manifest", eo.manifest, "manifest CSV path")->required();
    eval_cmd->add_option("--out-dir", eo.out_dir, "output directory")->capture_default_str();
    eval_cmd->add_option("--lambda", eo.lambda, "dim-0 weight in the window cost")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    eval_cmd->add_option("--kappa", eo.kappa, "decision threshold on the error")
        ->capture_default_str();
    eval_cmd->add_option("--smooth-k", eo.smooth_k, "median smoothing half-width")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    eval_cmd->add_option("--fpr-target", eo.fpr_target, "FPR target for the learned threshold")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    add_config_flags(eval_cmd, eo.cfg);

    std::vector<const char*> argv;
    argv.push_back("topoprint");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (fp_cmd->parsed()) return do_fingerprint(fo);
        if (cmp_cmd->parsed()) return do_compare(co);
        if (obf_cmd->parsed()) return do_obfuscate(oo);
        if (eval_cmd->parsed()) return do_evaluate(eo);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

} // namespace topo
