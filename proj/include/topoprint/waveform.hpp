#pragma once

#include <cstddef>
#include <vector>

namespace topo {

/// A mono audio signal: amplitude samples (roughly in [-1, 1]) at a fixed rate.
struct Waveform {
    std::vector<double> samples;
    int sample_rate = 44100;

    double duration() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
    size_t size() const { return samples.size(); }
};

/// Root-mean-square amplitude; 0 for an empty signal.
double rms(const Waveform& w);

} // namespace topo
