#pragma once

#include <vector>

#include "topoprint/core.hpp"
#include "topoprint/waveform.hpp"

namespace topo {

struct StftConfig {
    int window_size = 1024; // FFT window length N_w
    int hop = 256;          // frame advance in samples
    int n_mels = 128;       // mel filter count
    double f_min = 0.0;     // Hz; 0 means sample_rate / window_size
    double f_max = 0.0;     // Hz; 0 means sample_rate / 2
    double db_floor = 80.0; // dynamic range below the per-spectrogram max

    bool operator==(const StftConfig&) const = default;
};

/// Mel-scaled, dB-scaled spectrogram. values is n_mels x frames with mel
/// bins ordered low to high frequency; every entry lies in [-db_floor, 0]
/// relative to the loudest cell.
struct MelSpectrogram {
    Matrix values;
    std::vector<double> frame_times; // seconds, one per column
    StftConfig config;
    int sample_rate = 0;
};

/// w_k = (1 - cos(2 pi k / (n - 1))) / 2 for k in [0, n). Requires n >= 2.
std::vector<double> hann_window(int n);

/// Magnitude STFT: (window_size/2 + 1) rows, floor(len/hop) + 1 columns.
/// Frames are centred by reflection-padding window_size/2 samples per side.
Matrix stft_magnitude(const Waveform& w, const StftConfig& cfg);

/// Triangular unit-peak mel filterbank, n_mels x (window_size/2 + 1).
/// Filter edges are uniformly spaced in mel (2595 log10(1 + f/700)) between
/// f_min and f_max.
Matrix mel_filterbank(const StftConfig& cfg, int sample_rate);

/// Power spectrogram -> mel filterbank -> dB relative to the matrix max,
/// floored at -db_floor. Invariant under scaling the input by powers of two.
MelSpectrogram mel_spectrogram(const Waveform& w, const StftConfig& cfg);

} // namespace topo
