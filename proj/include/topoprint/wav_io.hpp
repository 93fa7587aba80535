#pragma once

#include <string>

#include "topoprint/waveform.hpp"

namespace topo {

/// Decode a RIFF/WAVE file. Accepts PCM 8/16/24/32-bit integer and 32-bit
/// float data, 1 or 2 channels; stereo is averaged down to mono. Samples are
/// scaled to [-1, 1]. Throws std::runtime_error on unreadable files,
/// unsupported codecs, or zero-length audio.
Waveform load_wav(const std::string& path);

/// Write a mono 16-bit PCM WAV file. Throws on empty input or I/O failure.
void save_wav(const Waveform& w, const std::string& path);

} // namespace topo
