#include "topoprint/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace topo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_rate(int sample_rate) {
    if (sample_rate <= 0) throw std::invalid_argument("synth: sample rate must be positive");
}

void check_tone(double freq, double dur, int sample_rate) {
    if (dur <= 0.0) throw std::invalid_argument("synth: duration must be positive");
    if (freq <= 0.0) throw std::invalid_argument("synth: frequency must be positive");
    if (freq >= sample_rate / 2.0) throw std::invalid_argument("synth: frequency at or above Nyquist");
}

size_t sample_count(double dur, int sample_rate) {
    return size_t(std::llround(dur * sample_rate));
}

// Uniform double in [0, 1) from the top 53 bits; avoids the
// implementation-defined behavior of std::uniform_real_distribution.
double next_unit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

} // namespace

Waveform synth(const SynthSpec& spec, int sample_rate) {
    check_rate(sample_rate);
    Waveform w;
    w.sample_rate = sample_rate;

    if (const auto* s = std::get_if<Sine>(&spec)) {
        check_tone(s->freq, s->dur, sample_rate);
        size_t n = sample_count(s->dur, sample_rate);
        w.samples.resize(n);
        for (size_t i = 0; i < n; ++i)
            w.samples[i] = std::sin(kTwoPi * s->freq * double(i) / sample_rate);
    } else if (const auto* c = std::get_if<Chirp>(&spec)) {
        check_tone(c->f0, c->dur, sample_rate);
        check_tone(c->f1, c->dur, sample_rate);
        size_t n = sample_count(c->dur, sample_rate);
        w.samples.resize(n);
        double slope = (c->f1 - c->f0) / c->dur;
        for (size_t i = 0; i < n; ++i) {
            double t = double(i) / sample_rate;
            w.samples[i] = std::sin(kTwoPi * (c->f0 * t + 0.5 * slope * t * t));
        }
    } else if (const auto* ts = std::get_if<ToneSequence>(&spec)) {
        if (ts->notes.empty()) throw std::invalid_argument("synth: empty tone sequence");
        double phase = 0.0;
        for (const auto& [freq, dur] : ts->notes) {
            check_tone(freq, dur, sample_rate);
            size_t n = sample_count(dur, sample_rate);
            double step = kTwoPi * freq / sample_rate;
            for (size_t i = 0; i < n; ++i) {
                w.samples.push_back(std::sin(phase));
                phase = std::fmod(phase + step, kTwoPi);
            }
        }
    } else if (const auto* h = std::get_if<HarmonicMix>(&spec)) {
        check_tone(h->fundamental, h->dur, sample_rate);
        if (h->n_partials < 1) throw std::invalid_argument("synth: need at least one partial");
        size_t n = sample_count(h->dur, sample_rate);
        w.samples.assign(n, 0.0);
        double norm = 0.0;
        for (int k = 1; k <= h->n_partials; ++k) {
            double f = h->fundamental * k;
            if (f >= sample_rate / 2.0) break; // partials above Nyquist are dropped
            double amp = 1.0 / k;
            norm += amp;
            for (size_t i = 0; i < n; ++i)
                w.samples[i] += amp * std::sin(kTwoPi * f * double(i) / sample_rate);
        }
        if (norm > 0.0)
            for (double& v : w.samples) v /= norm;
    } else if (const auto* sn = std::get_if<SeededNoise>(&spec)) {
        if (sn->dur <= 0.0) throw std::invalid_argument("synth: duration must be positive");
        size_t n = sample_count(sn->dur, sample_rate);
        w.samples.resize(n);
        std::mt19937_64 rng(sn->seed);
        for (size_t i = 0; i < n; ++i) w.samples[i] = next_unit(rng) - 0.5;
    } else {
        throw std::invalid_argument("synth: unknown spec");
    }

    if (w.samples.empty()) throw std::invalid_argument("synth: zero-length output");
    return w;
}

} // namespace topo
