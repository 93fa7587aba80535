#include "topoprint/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "fft_util.hpp"

namespace topo {

namespace {

void check_config(const StftConfig& cfg, int sample_rate) {
    if (sample_rate <= 0) throw std::invalid_argument("stft: sample rate must be positive");
    if (cfg.window_size < 2) throw std::invalid_argument("stft: window_size must be >= 2");
    if (cfg.hop <= 0 || cfg.hop > cfg.window_size)
        throw std::invalid_argument("stft: hop must satisfy 0 < hop <= window_size");
    if (cfg.n_mels < 2) throw std::invalid_argument("stft: n_mels must be >= 2");
    if (cfg.db_floor <= 0) throw std::invalid_argument("stft: db_floor must be positive");
}

// Mirror an index into [0, n) (symmetric reflection about the end samples).
size_t reflect_index(long long i, long long n) {
    if (n == 1) return 0;
    const long long period = 2 * (n - 1);
    long long m = i % period;
    if (m < 0) m += period;
    if (m >= n) m = period - m;
    return size_t(m);
}

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

} // namespace

std::vector<double> hann_window(int n) {
    if (n < 2) throw std::invalid_argument("hann_window: need at least 2 points");
    std::vector<double> w(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k)
        w[size_t(k)] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * k / (n - 1)));
    return w;
}

Matrix stft_magnitude(const Waveform& w, const StftConfig& cfg) {
    check_config(cfg, w.sample_rate);
    if (w.samples.empty()) throw std::invalid_argument("stft: empty waveform");

    const int nfft = cfg.window_size;
    const int pad = nfft / 2;
    const long long n = (long long)w.samples.size();
    const int frames = int(n / cfg.hop) + 1;
    const auto window = hann_window(nfft);

    RealFft fft(nfft);
    Matrix out(nfft / 2 + 1, frames);
    std::vector<double> frame(static_cast<size_t>(nfft));
    std::vector<std::complex<double>> spec(static_cast<size_t>(fft.bins()));

    for (int t = 0; t < frames; ++t) {
        const long long start = (long long)t * cfg.hop - pad;
        for (int j = 0; j < nfft; ++j)
            frame[size_t(j)] = w.samples[reflect_index(start + j, n)] * window[size_t(j)];
        fft.forward(frame.data(), spec.data());
        for (int k = 0; k <= nfft / 2; ++k) out.at(k, t) = std::abs(spec[size_t(k)]);
    }
    return out;
}

Matrix mel_filterbank(const StftConfig& cfg, int sample_rate) {
    check_config(cfg, sample_rate);
    const double f_min = cfg.f_min > 0.0 ? cfg.f_min : double(sample_rate) / cfg.window_size;
    const double f_max = cfg.f_max > 0.0 ? cfg.f_max : sample_rate / 2.0;
    if (!(0.0 < f_min && f_min < f_max && f_max <= sample_rate / 2.0))
        throw std::invalid_argument("mel_filterbank: need 0 < f_min < f_max <= sample_rate/2");

    const int n_bins = cfg.window_size / 2 + 1;
    const int m = cfg.n_mels;
    const double mel_lo = hz_to_mel(f_min);
    const double mel_hi = hz_to_mel(f_max);

    std::vector<double> edges(size_t(m) + 2);
    for (int i = 0; i < m + 2; ++i)
        edges[size_t(i)] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (m + 1));

    Matrix fb(m, n_bins);
    for (int row = 0; row < m; ++row) {
        const double lo = edges[size_t(row)];
        const double c = edges[size_t(row) + 1];
        const double hi = edges[size_t(row) + 2];
        for (int k = 0; k < n_bins; ++k) {
            const double f = double(k) * sample_rate / cfg.window_size;
            double v = 0.0;
            if (f > lo && f < hi) v = f <= c ? (f - lo) / (c - lo) : (hi - f) / (hi - c);
            fb.at(row, k) = v;
        }
    }
    return fb;
}

MelSpectrogram mel_spectrogram(const Waveform& w, const StftConfig& cfg) {
    Matrix mag = stft_magnitude(w, cfg);
    Matrix fb = mel_filterbank(cfg, w.sample_rate);

    const int frames = mag.cols;
    const int n_bins = mag.rows;
    Matrix mel(cfg.n_mels, frames);
    for (int r = 0; r < cfg.n_mels; ++r) {
        for (int t = 0; t < frames; ++t) {
            double acc = 0.0;
            for (int k = 0; k < n_bins; ++k) {
                const double m = mag.at(k, t);
                acc += fb.at(r, k) * (m * m);
            }
            mel.at(r, t) = acc;
        }
    }

    double ref = 0.0;
    for (double v : mel.data) ref = std::max(ref, v);
    ref = std::max(ref, 1e-10); // silence guard

    MelSpectrogram out;
    out.config = cfg;
    out.sample_rate = w.sample_rate;
    out.values = Matrix(cfg.n_mels, frames);
    for (size_t i = 0; i < mel.data.size(); ++i) {
        double db = 10.0 * std::log10(mel.data[i] / ref);
        if (!(db > -cfg.db_floor)) db = -cfg.db_floor; // also catches -inf from zero power
        out.values.data[i] = db;
    }
    out.frame_times.resize(size_t(frames));
    for (int t = 0; t < frames; ++t)
        out.frame_times[size_t(t)] = double(t) * cfg.hop / w.sample_rate;
    return out;
}

} // namespace topo
