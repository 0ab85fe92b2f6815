#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace holo::analytics {

struct AcousticFrame {
    double t_s = 0.0;  // frame centre
    double energy = 0.0;
    double zcr = 0.0;
};

// Frames are [k * hop, k * hop + frame_len) for every complete frame; a
// signal shorter than one frame yields a single frame over all of it.
// Throws Error("EmptySignal"), Error("InvalidArgument") for frame_len or
// hop of zero.
std::vector<AcousticFrame> short_time_energy(std::span<const double> samples, std::size_t frame_len,
                                             std::size_t hop, double sample_rate = 1.0);

// Sign changes between consecutive samples divided by (len - 1); zero counts
// as positive. Requires frame_len >= 2.
std::vector<AcousticFrame> zero_crossing_rate(std::span<const double> samples, std::size_t frame_len,
                                              std::size_t hop, double sample_rate = 1.0);

// Both features per frame.
std::vector<AcousticFrame> acoustic_frames(std::span<const double> samples, std::size_t frame_len, std::size_t hop,
                                           double sample_rate);

// Divides by the mean of the first max(1, floor(fraction * n)) values.
// Throws Error("ZeroBaseline"), Error("InvalidArgument") for fraction outside
// (0, 1) or an empty series.
std::vector<double> baseline_normalize(std::span<const double> series, double fraction = 0.25);
double baseline_mean(std::span<const double> series, double fraction = 0.25);

struct FrameDefaults {
    static constexpr double frame_s = 0.050;
    static constexpr double hop_s = 0.025;
};

// ---------------------------------------------------------------------------
// WAV I/O: 16-bit little-endian PCM, mono.

struct PcmAudio {
    int sample_rate = 16000;
    std::vector<double> samples;  // normalized to [-1, 1)
};

// Throws LocatedError("SchemaViolation") naming the file.
PcmAudio read_wav(const std::filesystem::path& path);
// Samples are clamped to [-1, 1] and rounded to the nearest 16-bit step.
void write_wav(const std::filesystem::path& path, const PcmAudio& audio);

} // namespace holo::analytics
