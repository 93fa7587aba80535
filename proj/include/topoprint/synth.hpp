#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "topoprint/waveform.hpp"

namespace topo {

// Deterministic test-signal generators. All durations are in seconds and
// must be positive; tone frequencies must lie in (0, sample_rate/2).

struct Sine {
    double freq;
    double dur;
};

struct Chirp {
    double f0;
    double f1;
    double dur;
};

struct ToneSequence {
    std::vector<std::pair<double, double>> notes; // (freq, dur)
};

struct HarmonicMix {
    double fundamental;
    int n_partials;
    double dur;
};

struct SeededNoise {
    double dur;
    uint64_t seed;
};

using SynthSpec = std::variant<Sine, Chirp, ToneSequence, HarmonicMix, SeededNoise>;

/// Render a synthesis spec at the given rate. Seeded generators are
/// reproducible bit-for-bit for a given seed.
Waveform synth(const SynthSpec& spec, int sample_rate = 44100);

} // namespace topo
