#pragma once

// Shared fixtures for the end-to-end tests: a deterministic synthetic "song"
// generator. Pure tones are useless here (any two sine windows are
// topologically alike), so a song layers a melody of harmonic stacks over a
// bass voice, with a per-song timbre profile, note-level loudness changes
// and soft onset transients. An explicit style index stratifies register,
// tempo and voicing so that a corpus of songs is diverse by construction.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "topoprint/waveform.hpp"

namespace testutil {

inline topo::Waveform make_song(uint64_t seed, double duration, int sample_rate = 44100,
                                int style = -1) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 1);
    auto pick = [&](int n) { return int(rng() % uint64_t(n)); };
    auto unit = [&] { return double(rng() >> 11) * 0x1.0p-53; };

    topo::Waveform w;
    w.sample_rate = sample_rate;
    w.samples.assign(size_t(std::llround(duration * sample_rate)), 0.0);

    const int register_idx = style >= 0 ? (7 * style) % 19 : pick(19);
    const double beat = 0.09 + 0.02 * (style >= 0 ? style % 4 : pick(4));
    const int n_partials = 4 + (style >= 0 ? style % 3 : pick(3));

    // per-song timbre: fixed relative partial weights
    std::vector<double> weights(static_cast<size_t>(n_partials));
    double wsum = 0.0;
    for (int k = 0; k < n_partials; ++k) {
        weights[size_t(k)] = (0.3 + 0.7 * unit()) / double(k + 1);
        wsum += weights[size_t(k)];
    }
    for (double& v : weights) v /= wsum;

    const int degrees[10] = {0, 3, 5, 7, 10, 12, 15, 19, 22, 27};
    const size_t attack = size_t(sample_rate / 200);
    const size_t release = size_t(3 * sample_rate / 100);

    auto add_voice = [&](double base_freq, double gain, int min_beats, int max_beats,
                         bool transients) {
        size_t pos = 0;
        while (pos < w.samples.size()) {
            const double f0 = base_freq * std::pow(2.0, degrees[pick(10)] / 12.0);
            const double amp = gain * (0.3 + 0.7 * unit());
            const size_t len = size_t(std::llround(
                beat * (min_beats + pick(max_beats - min_beats + 1)) * sample_rate));
            const size_t end = std::min(pos + len, w.samples.size());
            const double vib_rate = 4.0 + 2.0 * unit();
            const double vib_depth = 0.002 + 0.004 * unit();

            double phase = 0.0;
            for (size_t i = pos; i < end; ++i) {
                const double t = double(i) / sample_rate;
                const double f =
                    f0 * (1.0 + vib_depth * std::sin(2.0 * std::numbers::pi * vib_rate * t));
                phase += 2.0 * std::numbers::pi * f / sample_rate;
                double v = 0.0;
                for (int k = 0; k < n_partials; ++k) {
                    const double fk = f0 * (k + 1);
                    if (fk >= sample_rate / 2.0) break;
                    v += weights[size_t(k)] * std::sin(phase * (k + 1));
                }
                double env = 1.0;
                if (i - pos < attack) env = double(i - pos) / double(attack);
                if (end - i < release) env = std::min(env, double(end - i) / double(release));
                w.samples[i] += amp * env * v;
            }
            if (transients) {
                // soft noise burst marking the onset
                const size_t burst = size_t(sample_rate / 150);
                for (size_t i = pos; i < std::min(pos + burst, w.samples.size()); ++i) {
                    const double decay = 1.0 - double(i - pos) / double(burst);
                    w.samples[i] += 0.1 * amp * decay * (2.0 * unit() - 1.0);
                }
            }
            pos = end;
        }
    };

    const double melody_root = 165.0 * std::pow(2.0, register_idx / 12.0); // ~E3..A4
    add_voice(melody_root, 0.5, 1, 3, true);
    add_voice(melody_root / 4.0, 0.3, 1, 3, false); // bass two octaves down
    return w;
}

} // namespace testutil
