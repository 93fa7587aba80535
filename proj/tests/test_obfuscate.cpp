#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "topoprint/obfuscate.hpp"
#include "topoprint/spectral.hpp"
#include "topoprint/synth.hpp"

using namespace topo;

namespace {

Waveform diff(const Waveform& a, const Waveform& b) {
    Waveform d = a;
    for (size_t i = 0; i < d.samples.size(); ++i) d.samples[i] -= b.samples[i];
    return d;
}

double band_power(const Waveform& w, double f_lo, double f_hi) {
    Matrix m = stft_magnitude(w, StftConfig{});
    const double bin_hz = double(w.sample_rate) / 1024.0;
    double acc = 0.0;
    for (int k = 0; k < m.rows; ++k) {
        const double f = k * bin_hz;
        if (f < f_lo || f >= f_hi) continue;
        for (int t = 0; t < m.cols; ++t) acc += m.at(k, t) * m.at(k, t);
    }
    return acc;
}

int mel_peak_row(const Waveform& w) {
    MelSpectrogram mel = mel_spectrogram(w, StftConfig{});
    std::vector<double> avg(size_t(mel.values.rows), 0.0);
    for (int r = 0; r < mel.values.rows; ++r)
        for (int t = 0; t < mel.values.cols; ++t) avg[size_t(r)] += mel.values.at(r, t);
    return int(std::max_element(avg.begin(), avg.end()) - avg.begin());
}

} // namespace

TEST_CASE("white noise at degree zero is the identity") {
    Waveform w = synth(Sine{440.0, 0.5});
    Waveform out = obfuscate(w, {ObfuscationKind::WhiteNoise, 0.0}, 7);
    CHECK(out.samples == w.samples);
}

TEST_CASE("noise kinds hit the requested RMS exactly and stay zero-mean") {
    Waveform w = synth(HarmonicMix{220.0, 4, 2.0});
    const double base = rms(w);
    for (auto kind : {ObfuscationKind::WhiteNoise, ObfuscationKind::PinkNoise}) {
        for (double degree : {0.05, 0.1, 0.4}) {
            Waveform out = obfuscate(w, {kind, degree}, 99);
            Waveform noise = diff(out, w);
            const double mean =
                std::accumulate(noise.samples.begin(), noise.samples.end(), 0.0) /
                double(noise.samples.size());
            CHECK(std::abs(mean) < 0.01);
            CHECK(rms(noise) == doctest::Approx(degree * base).epsilon(0.05));
        }
    }
}

TEST_CASE("obfuscation is deterministic in the seed") {
    Waveform w = synth(SeededNoise{1.0, 5});
    Waveform a = obfuscate(w, {ObfuscationKind::PinkNoise, 0.2}, 42);
    Waveform b = obfuscate(w, {ObfuscationKind::PinkNoise, 0.2}, 42);
    Waveform c = obfuscate(w, {ObfuscationKind::PinkNoise, 0.2}, 43);
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);
}

TEST_CASE("pink noise power falls across octave bands") {
    Waveform w = synth(Sine{1000.0, 3.0});
    Waveform out = obfuscate(w, {ObfuscationKind::PinkNoise, 0.4}, 11);
    Waveform noise = diff(out, w);
    // average power per Hz over octaves away from the carrier
    double prev = std::numeric_limits<double>::infinity();
    for (auto [lo, hi] : {std::pair{100.0, 200.0}, {200.0, 400.0}, {400.0, 800.0},
                          {2000.0, 4000.0}, {4000.0, 8000.0}}) {
        const double p = band_power(noise, lo, hi) / (hi - lo);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("white noise power is roughly flat per Hz") {
    Waveform w = synth(Sine{1000.0, 3.0});
    Waveform noise = diff(obfuscate(w, {ObfuscationKind::WhiteNoise, 0.4}, 11), w);
    const double low = band_power(noise, 200.0, 400.0) / 200.0;
    const double high = band_power(noise, 4000.0, 8000.0) / 4000.0;
    CHECK(high / low == doctest::Approx(1.0).epsilon(0.35));
}

TEST_CASE("low-pass attenuates far above the cutoff by at least 12 dB") {
    Waveform noise = synth(SeededNoise{2.0, 77});
    const double cutoff = 1000.0;
    Waveform out = obfuscate(noise, {ObfuscationKind::LowPass, cutoff}, 0);
    const double before = band_power(noise, 4.0 * cutoff, 20000.0);
    const double after = band_power(out, 4.0 * cutoff, 20000.0);
    CHECK(10.0 * std::log10(before / after) >= 12.0);
}

TEST_CASE("high-pass attenuates far below the cutoff") {
    Waveform noise = synth(SeededNoise{2.0, 78});
    Waveform out = obfuscate(noise, {ObfuscationKind::HighPass, 2000.0}, 0);
    const double before = band_power(noise, 50.0, 500.0);
    const double after = band_power(out, 50.0, 500.0);
    CHECK(10.0 * std::log10(before / after) >= 12.0);
}

TEST_CASE("tempo shift scales the duration by one over the degree") {
    Waveform w = synth(HarmonicMix{330.0, 3, 30.0});
    Waveform out = obfuscate(w, {ObfuscationKind::TempoShift, 2.0}, 0);
    CHECK(out.samples.size() == w.samples.size() / 2);
    CHECK(std::abs(out.duration() - 15.0) < 0.01);
}

TEST_CASE("tempo shift round trip restores the duration within one hop") {
    Waveform w = synth(HarmonicMix{220.0, 4, 5.0});
    for (double g : {1.1, 1.5, 2.0, 0.8}) {
        Waveform fwd = obfuscate(w, {ObfuscationKind::TempoShift, g}, 0);
        Waveform back = obfuscate(fwd, {ObfuscationKind::TempoShift, 1.0 / g}, 0);
        CHECK(std::abs(double(back.samples.size()) - double(w.samples.size())) <= 256.0);
    }
}

TEST_CASE("pitch shift of +12 semitones doubles the dominant frequency") {
    Waveform w = synth(Sine{440.0, 1.0});
    Waveform out = obfuscate(w, {ObfuscationKind::PitchShift, 12.0}, 0);
    Waveform ref = synth(Sine{880.0, 1.0});
    CHECK(std::abs(mel_peak_row(out) - mel_peak_row(ref)) <= 1);
}

TEST_CASE("pitch shift preserves duration within one hop") {
    Waveform w = synth(HarmonicMix{261.63, 3, 2.0});
    for (double semis : {-12.0, -2.0, 0.0, 2.0, 7.0}) {
        Waveform out = obfuscate(w, {ObfuscationKind::PitchShift, semis}, 0);
        CHECK(std::abs(double(out.samples.size()) - double(w.samples.size())) <= 256.0);
    }
}

TEST_CASE("pitch shift of zero semitones is a near-identity") {
    Waveform w = synth(HarmonicMix{261.63, 3, 2.0});
    Waveform out = obfuscate(w, {ObfuscationKind::PitchShift, 0.0}, 0);
    REQUIRE(out.samples.size() == w.samples.size());
    // ignore the windowed edges
    double err = 0.0, ref = 0.0;
    for (size_t i = 2048; i + 2048 < w.samples.size(); ++i) {
        err += (out.samples[i] - w.samples[i]) * (out.samples[i] - w.samples[i]);
        ref += w.samples[i] * w.samples[i];
    }
    CHECK(std::sqrt(err / ref) < 0.1);
}

TEST_CASE("reverb keeps the duration and mixes by degree") {
    Waveform w = synth(ToneSequence{{{440.0, 0.5}, {550.0, 0.5}}});
    Waveform dry = obfuscate(w, {ObfuscationKind::Reverb, 0.0}, 0);
    CHECK(dry.samples == w.samples);
    Waveform wet = obfuscate(w, {ObfuscationKind::Reverb, 50.0}, 0);
    CHECK(wet.samples.size() == w.samples.size());
    CHECK(wet.samples != w.samples);
}

TEST_CASE("obfuscate validates degrees and input") {
    Waveform w = synth(Sine{440.0, 0.25});
    CHECK_THROWS_AS(obfuscate(w, {ObfuscationKind::WhiteNoise, -0.1}, 0), std::invalid_argument);
    CHECK_THROWS_AS(obfuscate(w, {ObfuscationKind::Reverb, 101.0}, 0), std::invalid_argument);
    CHECK_THROWS_AS(obfuscate(w, {ObfuscationKind::LowPass, 0.0}, 0), std::invalid_argument);
    CHECK_THROWS_AS(obfuscate(w, {ObfuscationKind::HighPass, 44100.0}, 0), std::invalid_argument);
    CHECK_THROWS_AS(obfuscate(w, {ObfuscationKind::TempoShift, 0.0}, 0), std::invalid_argument);
    CHECK_THROWS_AS(obfuscate(w, {ObfuscationKind::PitchShift, 0.5}, 0), std::invalid_argument);
    CHECK_THROWS_AS(obfuscate(w, {ObfuscationKind::PitchShift, 13.0}, 0), std::invalid_argument);
    Waveform empty;
    CHECK_THROWS_AS(obfuscate(empty, {ObfuscationKind::WhiteNoise, 0.1}, 0),
                    std::invalid_argument);
}

TEST_CASE("kind names round-trip") {
    for (auto kind : {ObfuscationKind::WhiteNoise, ObfuscationKind::PinkNoise,
                      ObfuscationKind::Reverb, ObfuscationKind::HighPass,
                      ObfuscationKind::LowPass, ObfuscationKind::TempoShift,
                      ObfuscationKind::PitchShift}) {
        CHECK(obfuscation_kind_from_string(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS(obfuscation_kind_from_string("flanger"), std::invalid_argument);
}
