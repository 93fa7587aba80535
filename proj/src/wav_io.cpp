#include "topoprint/wav_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace topo {

namespace {

uint32_t read_u32(const uint8_t* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

uint16_t read_u16(const uint8_t* p) { return uint16_t(p[0]) | uint16_t(p[1]) << 8; }

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error("load_wav: " + what + " (" + path + ")");
}

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

} // namespace

Waveform load_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        fail(path, "not a RIFF/WAVE file");
    }

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t sample_rate = 0;
    bool have_fmt = false;
    const uint8_t* data = nullptr;
    size_t data_size = 0;

    size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const uint8_t* hdr = bytes.data() + pos;
        uint32_t chunk_size = read_u32(hdr + 4);
        const uint8_t* body = hdr + 8;
        if (pos + 8 + chunk_size > bytes.size()) {
            // Tolerate a truncated final data chunk length field only for
            // "data"; anything else is malformed.
            if (std::memcmp(hdr, "data", 4) == 0) chunk_size = uint32_t(bytes.size() - pos - 8);
            else fail(path, "truncated chunk");
        }
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (chunk_size < 16) fail(path, "malformed fmt chunk");
            format = read_u16(body);
            channels = read_u16(body + 2);
            sample_rate = read_u32(body + 4);
            bits = read_u16(body + 14);
            if (format == kFormatExtensible) {
                if (chunk_size < 40) fail(path, "malformed extensible fmt chunk");
                format = read_u16(body + 24); // first two bytes of SubFormat GUID
            }
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            data = body;
            data_size = chunk_size;
        }
        pos += 8 + chunk_size + (chunk_size & 1); // chunks are word-aligned
    }

    if (!have_fmt) fail(path, "missing fmt chunk");
    if (data == nullptr) fail(path, "missing data chunk");
    if (sample_rate == 0) fail(path, "zero sample rate");
    if (channels < 1 || channels > 2) fail(path, "unsupported channel count");
    bool ok = (format == kFormatPcm && (bits == 8 || bits == 16 || bits == 24 || bits == 32)) ||
              (format == kFormatFloat && bits == 32);
    if (!ok) fail(path, "unsupported codec");

    const size_t bytes_per_sample = bits / 8;
    const size_t frame_size = bytes_per_sample * channels;
    const size_t n_frames = data_size / frame_size;
    if (n_frames == 0) fail(path, "zero-length audio");

    Waveform w;
    w.sample_rate = int(sample_rate);
    w.samples.resize(n_frames);
    for (size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (uint16_t ch = 0; ch < channels; ++ch) {
            const uint8_t* p = data + i * frame_size + ch * bytes_per_sample;
            double v = 0.0;
            if (format == kFormatFloat) {
                float f;
                std::memcpy(&f, p, 4);
                v = double(f);
            } else if (bits == 8) {
                v = (int(p[0]) - 128) / 128.0;
            } else if (bits == 16) {
                v = int16_t(read_u16(p)) / 32768.0;
            } else if (bits == 24) {
                int32_t s = int32_t(uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16);
                if (s & 0x800000) s -= 0x1000000;
                v = s / 8388608.0;
            } else { // 32-bit int
                v = int32_t(read_u32(p)) / 2147483648.0;
            }
            acc += v;
        }
        w.samples[i] = acc / channels;
    }
    for (double v : w.samples)
        if (!std::isfinite(v)) fail(path, "non-finite sample");
    return w;
}

void save_wav(const Waveform& w, const std::string& path) {
    if (w.samples.empty()) throw std::invalid_argument("save_wav: empty waveform");
    if (w.sample_rate <= 0) throw std::invalid_argument("save_wav: invalid sample rate");

    const uint32_t n = uint32_t(w.samples.size());
    const uint32_t data_size = n * 2;
    const uint32_t sr = uint32_t(w.sample_rate);

    std::vector<uint8_t> out;
    out.reserve(44 + data_size);
    auto put_tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
    auto put_u32 = [&](uint32_t v) {
        out.push_back(v & 0xFF);
        out.push_back((v >> 8) & 0xFF);
        out.push_back((v >> 16) & 0xFF);
        out.push_back((v >> 24) & 0xFF);
    };
    auto put_u16 = [&](uint16_t v) {
        out.push_back(v & 0xFF);
        out.push_back((v >> 8) & 0xFF);
    };

    put_tag("RIFF");
    put_u32(36 + data_size);
    put_tag("WAVE");
    put_tag("fmt ");
    put_u32(16);
    put_u16(kFormatPcm);
    put_u16(1); // mono
    put_u32(sr);
    put_u32(sr * 2);
    put_u16(2);
    put_u16(16);
    put_tag("data");
    put_u32(data_size);
    for (double v : w.samples) {
        long q = std::lround(v * 32768.0);
        q = std::clamp(q, -32768L, 32767L);
        put_u16(uint16_t(int16_t(q)));
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("save_wav: cannot open " + path);
    f.write(reinterpret_cast<const char*>(out.data()), std::streamsize(out.size()));
    if (!f) throw std::runtime_error("save_wav: write failed for " + path);
}

double rms(const Waveform& w) {
    if (w.samples.empty()) return 0.0;
    double acc = 0.0;
    for (double v : w.samples) acc += v * v;
    return std::sqrt(acc / double(w.samples.size()));
}

} // namespace topo
