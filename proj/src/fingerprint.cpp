#include "topoprint/fingerprint.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <zlib.h>

#include "io_util.hpp"
#include "json.hpp"

namespace topo {

namespace {

constexpr int kFormatVersion = 1;

void check_config(const FingerprintConfig& cfg) {
    if (!(cfg.window_seconds > 0.0))
        throw std::invalid_argument("fingerprint: window_seconds must be positive");
    if (!(cfg.overlap >= 0.0 && cfg.overlap < 1.0))
        throw std::invalid_argument("fingerprint: overlap must lie in [0, 1)");
    if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0))
        throw std::invalid_argument("fingerprint: lambda must lie in [0, 1]");
    if (cfg.betti_resolution < 2)
        throw std::invalid_argument("fingerprint: betti_resolution must be >= 2");
    if (!(cfg.betti_lo < cfg.betti_hi))
        throw std::invalid_argument("fingerprint: need betti_lo < betti_hi");
}

long long round_half_up(double x) { return (long long)std::floor(x + 0.5); }

using ordered_json = nlohmann::ordered_json;

ordered_json config_to_json(const FingerprintConfig& cfg) {
    ordered_json j;
    j["omega"] = cfg.window_seconds;
    j["tau"] = cfg.overlap;
    j["lambda"] = cfg.lambda;
    j["betti_resolution"] = cfg.betti_resolution;
    j["betti_domain"] = {cfg.betti_lo, cfg.betti_hi};
    ordered_json s;
    s["window_size"] = cfg.stft.window_size;
    s["hop"] = cfg.stft.hop;
    s["n_mels"] = cfg.stft.n_mels;
    s["f_min"] = cfg.stft.f_min;
    s["f_max"] = cfg.stft.f_max;
    s["db_floor"] = cfg.stft.db_floor;
    j["stft"] = s;
    return j;
}

FingerprintConfig config_from_json(const ordered_json& j) {
    FingerprintConfig cfg;
    cfg.window_seconds = j.at("omega").get<double>();
    cfg.overlap = j.at("tau").get<double>();
    cfg.lambda = j.at("lambda").get<double>();
    cfg.betti_resolution = j.at("betti_resolution").get<int>();
    cfg.betti_lo = j.at("betti_domain").at(0).get<double>();
    cfg.betti_hi = j.at("betti_domain").at(1).get<double>();
    const auto& s = j.at("stft");
    cfg.stft.window_size = s.at("window_size").get<int>();
    cfg.stft.hop = s.at("hop").get<int>();
    cfg.stft.n_mels = s.at("n_mels").get<int>();
    cfg.stft.f_min = s.at("f_min").get<double>();
    cfg.stft.f_max = s.at("f_max").get<double>();
    cfg.stft.db_floor = s.at("db_floor").get<double>();
    return cfg;
}

// Canonical payload: fixed key order, compact separators. The stored CRC32
// is computed over exactly these bytes.
ordered_json fingerprint_to_json(const Fingerprint& fp) {
    ordered_json j;
    j["version"] = kFormatVersion;
    j["config"] = config_to_json(fp.config);
    j["sample_rate"] = fp.source_sample_rate;
    j["source_duration"] = fp.source_duration;
    ordered_json entries = ordered_json::array();
    for (const auto& e : fp.entries) {
        ordered_json je;
        je["t"] = e.t;
        je["beta0"] = e.beta0.samples;
        je["beta1"] = e.beta1.samples;
        entries.push_back(std::move(je));
    }
    j["entries"] = std::move(entries);
    return j;
}

uint32_t crc_of(const std::string& payload) {
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(payload.data()), uInt(payload.size()));
    return uint32_t(crc);
}

} // namespace

std::vector<std::pair<double, IntensityImage>> window_slices(const MelSpectrogram& spec,
                                                             const FingerprintConfig& cfg) {
    check_config(cfg);
    if (spec.sample_rate <= 0 || spec.values.empty())
        throw std::invalid_argument("window_slices: empty spectrogram");

    const double fs = spec.sample_rate;
    const double hop = spec.config.hop;
    const double omega = cfg.window_seconds;
    const double stride = (1.0 - cfg.overlap) * omega;
    const int width = int(round_half_up(omega * fs / hop));
    if (width < 1) throw std::invalid_argument("window_slices: window shorter than one hop");
    if (width > spec.values.cols)
        throw std::invalid_argument("window_slices: track shorter than the window length");

    std::vector<std::pair<double, IntensityImage>> out;
    for (int i = 0;; ++i) {
        const long long start = round_half_up(double(i) * stride * fs / hop);
        if (start + width > spec.values.cols) break;
        IntensityImage img(spec.values.rows, width);
        for (int r = 0; r < img.rows; ++r)
            for (int c = 0; c < width; ++c) img.at(r, c) = spec.values.at(r, int(start) + c);
        out.emplace_back(double(i) * stride + omega / 2.0, std::move(img));
    }
    return out;
}

IntensityImage normalize_window(const IntensityImage& w) {
    if (w.empty()) throw std::invalid_argument("normalize_window: empty image");
    double lo = w.data[0], hi = w.data[0];
    for (double v : w.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    IntensityImage out(w.rows, w.cols);
    if (hi > lo) {
        const double scale = hi - lo;
        for (size_t i = 0; i < w.data.size(); ++i) out.data[i] = (w.data[i] - lo) / scale;
    }
    return out; // constant windows map to all zeros
}

Fingerprint fingerprint_track(const Waveform& w, const FingerprintConfig& cfg) {
    check_config(cfg);
    if (w.duration() < cfg.window_seconds)
        throw std::invalid_argument("fingerprint_track: track shorter than one window");

    MelSpectrogram spec = mel_spectrogram(w, cfg.stft);
    auto slices = window_slices(spec, cfg);

    Fingerprint fp;
    fp.config = cfg;
    fp.source_sample_rate = w.sample_rate;
    fp.source_duration = w.duration();
    fp.entries.reserve(slices.size());
    for (auto& [t, img] : slices) {
        Barcode bc = upper_star_persistence(normalize_window(img));
        FingerprintEntry e;
        e.t = t;
        e.beta0 = betti_curve(bc, 0, cfg.betti_lo, cfg.betti_hi, cfg.betti_resolution);
        e.beta1 = betti_curve(bc, 1, cfg.betti_lo, cfg.betti_hi, cfg.betti_resolution);
        fp.entries.push_back(std::move(e));
    }
    return fp;
}

void write_fingerprint(const Fingerprint& fp, const std::string& path) {
    ordered_json j = fingerprint_to_json(fp);
    const std::string payload = j.dump();
    j["crc32"] = crc_of(payload);
    atomic_write(path, j.dump());
}

Fingerprint read_fingerprint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_fingerprint: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_fingerprint: malformed file " + path + ": " + e.what());
    }

    if (!j.is_object() || !j.contains("version") || !j.at("version").is_number_integer())
        throw std::runtime_error("read_fingerprint: malformed file " + path + ": missing version");
    if (j.at("version").get<int>() != kFormatVersion)
        throw std::runtime_error("read_fingerprint: version mismatch in " + path + " (got " +
                                 std::to_string(j.at("version").get<int>()) + ", expected " +
                                 std::to_string(kFormatVersion) + ")");

    Fingerprint fp;
    try {
        fp.config = config_from_json(j.at("config"));
        fp.source_sample_rate = j.at("sample_rate").get<int>();
        fp.source_duration = j.at("source_duration").get<double>();
        for (const auto& je : j.at("entries")) {
            FingerprintEntry e;
            e.t = je.at("t").get<double>();
            e.beta0.lo = e.beta1.lo = fp.config.betti_lo;
            e.beta0.hi = e.beta1.hi = fp.config.betti_hi;
            e.beta0.samples = je.at("beta0").get<std::vector<int>>();
            e.beta1.samples = je.at("beta1").get<std::vector<int>>();
            fp.entries.push_back(std::move(e));
        }
        if (!j.contains("crc32") || !j.at("crc32").is_number_unsigned())
            throw std::runtime_error("missing checksum");
        const uint32_t stored = j.at("crc32").get<uint32_t>();
        const std::string canonical = fingerprint_to_json(fp).dump();
        if (crc_of(canonical) != stored)
            throw std::runtime_error("checksum failure");
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_fingerprint: malformed file " + path + ": " + e.what());
    } catch (const std::runtime_error& e) {
        throw std::runtime_error("read_fingerprint: " + std::string(e.what()) + " in " + path);
    }
    return fp;
}

} // namespace topo
