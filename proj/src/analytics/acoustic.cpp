#include "holo/analytics/acoustic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "holo/error.hpp"

namespace holo::analytics {

namespace {

struct Span {
    std::size_t begin;
    std::size_t len;
};

std::vector<Span> frame_spans(std::size_t n, std::size_t frame_len, std::size_t hop) {
    if (n == 0) throw Error("EmptySignal", "signal has no samples");
    if (frame_len == 0 || hop == 0) throw Error("InvalidArgument", "frame length and hop must be positive");
    std::vector<Span> spans;
    if (n < frame_len) {
        spans.push_back({0, n});
        return spans;
    }
    for (std::size_t start = 0; start + frame_len <= n; start += hop) spans.push_back({start, frame_len});
    return spans;
}

double centre(const Span& s, double sample_rate) {
    return (static_cast<double>(s.begin) + static_cast<double>(s.len) / 2.0) / sample_rate;
}

double frame_energy(std::span<const double> x) {
    double sum = 0.0;
    for (double v : x) sum += v * v;
    return sum / static_cast<double>(x.size());
}

double frame_zcr(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    std::size_t changes = 0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        if ((x[i - 1] >= 0.0) != (x[i] >= 0.0)) ++changes;
    }
    return static_cast<double>(changes) / static_cast<double>(x.size() - 1);
}

} // namespace

std::vector<AcousticFrame> short_time_energy(std::span<const double> samples, std::size_t frame_len,
                                             std::size_t hop, double sample_rate) {
    std::vector<AcousticFrame> out;
    for (const Span& s : frame_spans(samples.size(), frame_len, hop)) {
        out.push_back({centre(s, sample_rate), frame_energy(samples.subspan(s.begin, s.len)), 0.0});
    }
    return out;
}

std::vector<AcousticFrame> zero_crossing_rate(std::span<const double> samples, std::size_t frame_len,
                                              std::size_t hop, double sample_rate) {
    if (frame_len < 2) throw Error("InvalidArgument", "zero-crossing rate needs frames of at least two samples");
    std::vector<AcousticFrame> out;
    for (const Span& s : frame_spans(samples.size(), frame_len, hop)) {
        out.push_back({centre(s, sample_rate), 0.0, frame_zcr(samples.subspan(s.begin, s.len))});
    }
    return out;
}

std::vector<AcousticFrame> acoustic_frames(std::span<const double> samples, std::size_t frame_len, std::size_t hop,
                                           double sample_rate) {
    std::vector<AcousticFrame> out;
    for (const Span& s : frame_spans(samples.size(), frame_len, hop)) {
        const auto x = samples.subspan(s.begin, s.len);
        out.push_back({centre(s, sample_rate), frame_energy(x), frame_zcr(x)});
    }
    return out;
}

double baseline_mean(std::span<const double> series, double fraction) {
    if (series.empty()) throw Error("InvalidArgument", "series is empty");
    if (!(fraction > 0.0 && fraction < 1.0)) throw Error("InvalidArgument", "fraction must be in (0, 1)");
    const auto count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(series.size()))));
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) sum += series[i];
    return sum / static_cast<double>(count);
}

std::vector<double> baseline_normalize(std::span<const double> series, double fraction) {
    const double base = baseline_mean(series, fraction);
    if (!(base > 0.0)) throw Error("ZeroBaseline", "baseline mean must be positive");
    std::vector<double> out(series.begin(), series.end());
    for (double& v : out) v /= base;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::uint32_t u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

} // namespace

PcmAudio read_wav(const std::filesystem::path& path) {
    auto fail = [&](const std::string& detail) -> void {
        throw LocatedError("SchemaViolation", path.string(), detail);
    };
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open audio file");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0) {
        fail("not a RIFF/WAVE file");
    }

    PcmAudio audio;
    bool have_fmt = false;
    bool have_data = false;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t size = u32(data + pos + 4);
        const std::size_t body = pos + 8;
        if (size > bytes.size() - body) fail("chunk runs past end of file");
        if (std::memcmp(data + pos, "fmt ", 4) == 0) {
            if (size < 16) fail("fmt chunk too short");
            const std::uint16_t format = u16(data + body);
            const std::uint16_t channels = u16(data + body + 2);
            const std::uint32_t rate = u32(data + body + 4);
            const std::uint16_t bits = u16(data + body + 14);
            if (format != 1) fail("only PCM audio is supported");
            if (channels != 1) fail("only mono audio is supported");
            if (bits != 16) fail("only 16-bit samples are supported");
            if (rate == 0 || rate > 1'000'000) fail("invalid sample rate");
            audio.sample_rate = static_cast<int>(rate);
            have_fmt = true;
        } else if (std::memcmp(data + pos, "data", 4) == 0) {
            if (!have_fmt) fail("data chunk before fmt chunk");
            const std::size_t n = size / 2;
            audio.samples.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto raw = static_cast<std::int16_t>(u16(data + body + 2 * i));
                audio.samples[i] = static_cast<double>(raw) / 32768.0;
            }
            have_data = true;
        }
        pos = body + size + (size & 1);
    }
    if (!have_fmt || !have_data) fail("missing fmt or data chunk");
    return audio;
}

void write_wav(const std::filesystem::path& path, const PcmAudio& audio) {
    std::string pcm;
    pcm.reserve(audio.samples.size() * 2);
    for (double s : audio.samples) {
        const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
        const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
        put16(pcm, static_cast<std::uint16_t>(v));
    }
    std::string out = "RIFF";
    put32(out, static_cast<std::uint32_t>(36 + pcm.size()));
    out += "WAVEfmt ";
    put32(out, 16);
    put16(out, 1);
    put16(out, 1);
    put32(out, static_cast<std::uint32_t>(audio.sample_rate));
    put32(out, static_cast<std::uint32_t>(audio.sample_rate * 2));
    put16(out, 2);
    put16(out, 16);
    out += "data";
    put32(out, static_cast<std::uint32_t>(pcm.size()));
    out += pcm;

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("IoError", "cannot write " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

} // namespace holo::analytics
