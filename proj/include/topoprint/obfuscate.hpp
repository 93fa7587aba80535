#pragma once

#include <cstdint>
#include <string>

#include "topoprint/waveform.hpp"

namespace topo {

enum class ObfuscationKind {
    WhiteNoise,
    PinkNoise,
    Reverb,
    HighPass,
    LowPass,
    TempoShift,
    PitchShift,
};

/// Degree semantics per kind:
///   white_noise / pink_noise : noise-to-signal RMS ratio, >= 0
///   reverb                   : wet percentage in [0, 100]
///   high_pass / low_pass     : cutoff frequency in Hz, (0, sample_rate/2)
///   tempo_shift              : speed factor > 0 (1 = identity); output
///                              duration is input duration / degree
///   pitch_shift              : integer semitones in [-12, 12]
struct ObfuscationSpec {
    ObfuscationKind kind;
    double degree;
};

ObfuscationKind obfuscation_kind_from_string(const std::string& name);
std::string to_string(ObfuscationKind kind);

/// Apply an obfuscation. Deterministic given (w, spec, seed); the seed only
/// affects the stochastic kinds (noises). Throws on illegal degrees or empty
/// input.
Waveform obfuscate(const Waveform& w, const ObfuscationSpec& spec, uint64_t seed);

} // namespace topo
