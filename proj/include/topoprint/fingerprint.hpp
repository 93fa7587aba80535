#pragma once

#include <string>
#include <utility>
#include <vector>

#include "topoprint/cubical.hpp"
#include "topoprint/spectral.hpp"
#include "topoprint/waveform.hpp"

namespace topo {

struct FingerprintConfig {
    double window_seconds = 1.0; // omega
    double overlap = 0.4;        // tau, fraction in [0, 1)
    double lambda = 0.5;         // dim-0 weight used downstream by matching
    int betti_resolution = 256;
    double betti_lo = 0.0;
    double betti_hi = 1.0;
    StftConfig stft;

    bool operator==(const FingerprintConfig&) const = default;
};

struct FingerprintEntry {
    double t; // window midpoint, seconds
    BettiCurve beta0;
    BettiCurve beta1;

    bool operator==(const FingerprintEntry&) const = default;
};

struct Fingerprint {
    FingerprintConfig config;
    int source_sample_rate = 0;
    double source_duration = 0.0; // seconds
    std::vector<FingerprintEntry> entries;

    bool operator==(const Fingerprint&) const = default;
};

/// Cut the spectrogram into overlapping windows. Window i covers columns
/// [round(i (1-tau) omega fs / hop), + round(omega fs / hop)); windows that
/// would overrun the spectrogram are dropped. Returns (midpoint time, image)
/// per window. Throws if the track is shorter than omega.
std::vector<std::pair<double, IntensityImage>> window_slices(const MelSpectrogram& spec,
                                                             const FingerprintConfig& cfg);

/// Min-max normalize to [0, 1]; a constant window maps to all zeros.
IntensityImage normalize_window(const IntensityImage& w);

/// Full pipeline: mel spectrogram, window slicing, per-window normalization,
/// persistence, Betti curves on [betti_lo, betti_hi] x betti_resolution.
Fingerprint fingerprint_track(const Waveform& w, const FingerprintConfig& cfg);

/// Versioned JSON format with a CRC32 of the canonical serialization.
/// Round-trips losslessly. read_fingerprint throws on version mismatch,
/// malformed files, and checksum failures.
void write_fingerprint(const Fingerprint& fp, const std::string& path);
Fingerprint read_fingerprint(const std::string& path);

} // namespace topo
