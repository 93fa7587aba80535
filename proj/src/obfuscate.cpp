#include "topoprint/obfuscate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "fft_util.hpp"
#include "topoprint/spectral.hpp"

namespace topo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double next_unit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

// ---------------------------------------------------------------------------
// Additive noise. The generated noise is de-meaned and rescaled so that its
// RMS is exactly degree * RMS(input).

std::vector<double> white_noise(size_t n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> out(n);
    for (double& v : out) v = 2.0 * next_unit(rng) - 1.0;
    return out;
}

// Voss-McCartney pink noise: row k holds its value for 2^k samples.
std::vector<double> pink_noise(size_t n, uint64_t seed) {
    constexpr int kRows = 16;
    std::mt19937_64 rng(seed);
    double rows[kRows];
    for (double& r : rows) r = 2.0 * next_unit(rng) - 1.0;
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) {
        if (i > 0) {
            const int k = std::min(std::countr_zero(i), kRows - 1);
            rows[k] = 2.0 * next_unit(rng) - 1.0;
        }
        double acc = 0.0;
        for (double r : rows) acc += r;
        out[i] = acc / kRows;
    }
    return out;
}

Waveform add_scaled_noise(const Waveform& w, std::vector<double> noise, double target_rms) {
    double mean = 0.0;
    for (double v : noise) mean += v;
    mean /= double(noise.size());
    double power = 0.0;
    for (double& v : noise) {
        v -= mean;
        power += v * v;
    }
    const double raw_rms = std::sqrt(power / double(noise.size()));
    const double scale = raw_rms > 0.0 ? target_rms / raw_rms : 0.0;
    Waveform out = w;
    for (size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += noise[i] * scale;
    return out;
}

// ---------------------------------------------------------------------------
// 2nd-order Butterworth biquad (Q = 1/sqrt(2)), RBJ cookbook coefficients.

Waveform biquad_filter(const Waveform& w, double cutoff, bool high_pass) {
    const double w0 = kTwoPi * cutoff / w.sample_rate;
    const double cw = std::cos(w0);
    const double alpha = std::sin(w0) / std::sqrt(2.0);
    double b0, b1, b2;
    if (high_pass) {
        b0 = (1.0 + cw) / 2.0;
        b1 = -(1.0 + cw);
        b2 = b0;
    } else {
        b0 = (1.0 - cw) / 2.0;
        b1 = 1.0 - cw;
        b2 = b0;
    }
    const double a0 = 1.0 + alpha;
    const double a1 = -2.0 * cw;
    const double a2 = 1.0 - alpha;

    Waveform out = w;
    double z1 = 0.0, z2 = 0.0; // direct form II transposed
    for (double& s : out.samples) {
        const double x = s;
        const double y = (b0 * x + z1) / a0;
        z1 = b1 * x - a1 * y + z2;
        z2 = b2 * x - a2 * y;
        s = y;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Schroeder reverberator: 4 parallel feedback combs into 2 series all-pass
// stages. Delays are in samples at 44.1 kHz and scale with the actual rate.

struct Comb {
    std::vector<double> buf;
    size_t pos = 0;
    double feedback;
    double process(double x) {
        const double y = buf[pos];
        buf[pos] = x + y * feedback;
        pos = (pos + 1) % buf.size();
        return y;
    }
};

struct AllPass {
    std::vector<double> buf;
    size_t pos = 0;
    double gain;
    double process(double x) {
        const double d = buf[pos];
        const double y = d - gain * x;
        buf[pos] = x + gain * d;
        pos = (pos + 1) % buf.size();
        return y;
    }
};

Waveform schroeder_reverb(const Waveform& w, double wet_mix) {
    constexpr int kCombDelays[4] = {1116, 1188, 1277, 1356};
    constexpr double kCombFeedback = 0.84;
    constexpr int kAllPassDelays[2] = {556, 441};
    constexpr double kAllPassGain = 0.5;

    const double rate_scale = double(w.sample_rate) / 44100.0;
    Comb combs[4];
    for (int i = 0; i < 4; ++i) {
        const size_t d = size_t(std::max(1L, std::lround(kCombDelays[i] * rate_scale)));
        combs[i].buf.assign(d, 0.0);
        combs[i].feedback = kCombFeedback;
    }
    AllPass aps[2];
    for (int i = 0; i < 2; ++i) {
        const size_t d = size_t(std::max(1L, std::lround(kAllPassDelays[i] * rate_scale)));
        aps[i].buf.assign(d, 0.0);
        aps[i].gain = kAllPassGain;
    }

    Waveform out = w;
    for (size_t i = 0; i < w.samples.size(); ++i) {
        const double x = w.samples[i];
        double wet = 0.0;
        for (Comb& c : combs) wet += c.process(x);
        wet *= 0.25;
        for (AllPass& ap : aps) wet = ap.process(wet);
        out.samples[i] = (1.0 - wet_mix) * x + wet_mix * wet;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Phase-vocoder time stretch. Output length is round(len / speed); synthesis
// frames advance by a fixed hop while analysis frames advance by hop * speed.
// Phase is propagated at magnitude peaks from the unwrapped instantaneous
// frequency; the remaining bins are phase-locked to their nearest peak, which
// keeps harmonic stacks coherent.

Waveform time_stretch(const Waveform& w, double speed) {
    constexpr int kWin = 1024;
    constexpr int kHop = 256;

    const long long n_in = (long long)w.samples.size();
    const long long n_out = std::max(1LL, (long long)std::llround(double(n_in) / speed));

    std::vector<double> x(w.samples);
    if (n_in < kWin) x.resize(kWin, 0.0);
    const long long max_pos = (long long)x.size() - kWin;

    const auto window = hann_window(kWin);
    RealFft fft(kWin);
    const int bins = fft.bins();

    const long long n_frames = (n_out - 1) / kHop + 1;
    std::vector<double> ola(size_t(n_frames - 1) * kHop + kWin, 0.0);
    std::vector<double> wsum(ola.size(), 0.0);

    std::vector<double> frame(kWin);
    std::vector<std::complex<double>> spec(static_cast<size_t>(bins));
    std::vector<std::complex<double>> syn(static_cast<size_t>(bins));
    std::vector<double> mag(static_cast<size_t>(bins));
    std::vector<double> phase(static_cast<size_t>(bins));
    std::vector<double> prev_phase(static_cast<size_t>(bins), 0.0);
    std::vector<double> syn_phase(static_cast<size_t>(bins), 0.0);
    std::vector<int> owner(static_cast<size_t>(bins));
    std::vector<double> out_frame(kWin);
    long long prev_pos = 0;

    for (long long m = 0; m < n_frames; ++m) {
        const long long pos = std::clamp((long long)std::llround(double(m) * kHop * speed), 0LL, max_pos);
        for (int j = 0; j < kWin; ++j) frame[size_t(j)] = x[size_t(pos + j)] * window[size_t(j)];
        fft.forward(frame.data(), spec.data());
        for (int k = 0; k < bins; ++k) {
            mag[size_t(k)] = std::abs(spec[size_t(k)]);
            phase[size_t(k)] = std::arg(spec[size_t(k)]);
        }

        // Assign every bin to its nearest magnitude peak.
        std::vector<int> peaks;
        for (int k = 1; k + 1 < bins; ++k)
            if (mag[size_t(k)] >= mag[size_t(k) - 1] && mag[size_t(k)] > mag[size_t(k) + 1])
                peaks.push_back(k);
        if (peaks.empty()) {
            for (int k = 0; k < bins; ++k) owner[size_t(k)] = k;
        } else {
            size_t p = 0;
            for (int k = 0; k < bins; ++k) {
                while (p + 1 < peaks.size() &&
                       std::abs(peaks[p + 1] - k) <= std::abs(peaks[p] - k))
                    ++p;
                owner[size_t(k)] = peaks[p];
            }
        }

        if (m == 0) {
            syn_phase = phase;
        } else {
            const double hop_in = double(pos - prev_pos);
            auto propagate = [&](int k) {
                const double bin_freq = kTwoPi * k / kWin;
                double inst = bin_freq;
                if (hop_in > 0.0) {
                    double d = phase[size_t(k)] - prev_phase[size_t(k)] - bin_freq * hop_in;
                    d -= kTwoPi * std::round(d / kTwoPi);
                    inst = bin_freq + d / hop_in;
                }
                return syn_phase[size_t(k)] + inst * kHop;
            };
            std::vector<double> next(static_cast<size_t>(bins));
            for (int k = 0; k < bins; ++k) {
                const int pk = owner[size_t(k)];
                next[size_t(k)] =
                    pk == k ? propagate(k)
                            : propagate(pk) + (phase[size_t(k)] - phase[size_t(pk)]);
            }
            syn_phase = std::move(next);
        }
        prev_phase = phase;
        for (int k = 0; k < bins; ++k)
            syn[size_t(k)] = std::polar(mag[size_t(k)], syn_phase[size_t(k)]);
        syn[0] = {syn[0].real(), 0.0};
        syn[size_t(bins) - 1] = {syn[size_t(bins) - 1].real(), 0.0};

        fft.inverse(syn.data(), out_frame.data());
        const size_t base = size_t(m) * kHop;
        for (int j = 0; j < kWin; ++j) {
            ola[base + size_t(j)] += out_frame[size_t(j)] * window[size_t(j)];
            wsum[base + size_t(j)] += window[size_t(j)] * window[size_t(j)];
        }
        prev_pos = pos;
    }

    Waveform out;
    out.sample_rate = w.sample_rate;
    out.samples.resize(size_t(n_out));
    for (long long i = 0; i < n_out; ++i)
        out.samples[size_t(i)] = ola[size_t(i)] / std::max(wsum[size_t(i)], 1e-9);
    return out;
}

// ---------------------------------------------------------------------------
// Windowed-sinc resampler (Kaiser beta = 8, 32 taps per side). ratio is the
// number of input samples consumed per output sample.

double bessel_i0(double x) {
    double sum = 1.0, term = 1.0;
    const double half_sq = x * x / 4.0;
    for (int k = 1; k < 64; ++k) {
        term *= half_sq / (double(k) * k);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

Waveform resample(const Waveform& w, double ratio) {
    constexpr int kHalfWidth = 32;
    constexpr double kBeta = 8.0;
    const double i0_beta = bessel_i0(kBeta);

    const long long n_in = (long long)w.samples.size();
    const long long n_out = std::max(1LL, (long long)std::llround(double(n_in) / ratio));
    const double fc = std::min(1.0, 1.0 / ratio);

    Waveform out;
    out.sample_rate = w.sample_rate;
    out.samples.resize(size_t(n_out));
    for (long long n = 0; n < n_out; ++n) {
        const double pos = double(n) * ratio;
        const long long base = (long long)std::floor(pos);
        const double frac = pos - double(base);
        double acc = 0.0, ksum = 0.0;
        for (int t = -kHalfWidth + 1; t <= kHalfWidth; ++t) {
            const double u = double(t) - frac;
            const double a = std::abs(u) / kHalfWidth;
            if (a >= 1.0) continue;
            const double arg = std::numbers::pi * fc * u;
            const double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(arg) / arg;
            const double h = fc * sinc * bessel_i0(kBeta * std::sqrt(1.0 - a * a)) / i0_beta;
            ksum += h;
            const long long idx = base + t;
            if (idx >= 0 && idx < n_in) acc += w.samples[size_t(idx)] * h;
        }
        out.samples[size_t(n)] = ksum != 0.0 ? acc / ksum : 0.0;
    }
    return out;
}

Waveform pitch_shift(const Waveform& w, int semitones) {
    const double r = std::pow(2.0, semitones / 12.0);
    // Stretch duration by r (pitch unchanged), then resample r input samples
    // per output sample (duration restored, pitch scaled by r).
    return resample(time_stretch(w, 1.0 / r), r);
}

} // namespace

ObfuscationKind obfuscation_kind_from_string(const std::string& name) {
    if (name == "white_noise") return ObfuscationKind::WhiteNoise;
    if (name == "pink_noise") return ObfuscationKind::PinkNoise;
    if (name == "reverb") return ObfuscationKind::Reverb;
    if (name == "high_pass") return ObfuscationKind::HighPass;
    if (name == "low_pass") return ObfuscationKind::LowPass;
    if (name == "tempo_shift") return ObfuscationKind::TempoShift;
    if (name == "pitch_shift") return ObfuscationKind::PitchShift;
    throw std::invalid_argument("unknown obfuscation kind: " + name);
}

std::string to_string(ObfuscationKind kind) {
    switch (kind) {
        case ObfuscationKind::WhiteNoise: return "white_noise";
        case ObfuscationKind::PinkNoise: return "pink_noise";
        case ObfuscationKind::Reverb: return "reverb";
        case ObfuscationKind::HighPass: return "high_pass";
        case ObfuscationKind::LowPass: return "low_pass";
        case ObfuscationKind::TempoShift: return "tempo_shift";
        case ObfuscationKind::PitchShift: return "pitch_shift";
    }
    throw std::invalid_argument("unknown obfuscation kind");
}

Waveform obfuscate(const Waveform& w, const ObfuscationSpec& spec, uint64_t seed) {
    if (w.samples.empty()) throw std::invalid_argument("obfuscate: empty input");
    if (w.sample_rate <= 0) throw std::invalid_argument("obfuscate: invalid sample rate");

    switch (spec.kind) {
        case ObfuscationKind::WhiteNoise:
        case ObfuscationKind::PinkNoise: {
            if (!(spec.degree >= 0.0))
                throw std::invalid_argument("obfuscate: noise degree must be >= 0");
            if (spec.degree == 0.0) return w;
            auto noise = spec.kind == ObfuscationKind::WhiteNoise
                             ? white_noise(w.samples.size(), seed)
                             : pink_noise(w.samples.size(), seed);
            return add_scaled_noise(w, std::move(noise), spec.degree * rms(w));
        }
        case ObfuscationKind::Reverb: {
            if (!(spec.degree >= 0.0 && spec.degree <= 100.0))
                throw std::invalid_argument("obfuscate: reverb degree must be in [0, 100]");
            return schroeder_reverb(w, spec.degree / 100.0);
        }
        case ObfuscationKind::HighPass:
        case ObfuscationKind::LowPass: {
            if (!(spec.degree > 0.0 && spec.degree < w.sample_rate / 2.0))
                throw std::invalid_argument("obfuscate: cutoff must lie in (0, sample_rate/2)");
            return biquad_filter(w, spec.degree, spec.kind == ObfuscationKind::HighPass);
        }
        case ObfuscationKind::TempoShift: {
            if (!(spec.degree > 0.0))
                throw std::invalid_argument("obfuscate: tempo degree must be > 0");
            return time_stretch(w, spec.degree);
        }
        case ObfuscationKind::PitchShift: {
            const double rounded = std::round(spec.degree);
            if (std::abs(spec.degree - rounded) > 1e-9 || rounded < -12.0 || rounded > 12.0)
                throw std::invalid_argument(
                    "obfuscate: pitch degree must be an integer number of semitones in [-12, 12]");
            return pitch_shift(w, int(rounded));
        }
    }
    throw std::invalid_argument("obfuscate: unknown kind");
}

} // namespace topo
