#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace hnmsing {

inline constexpr int kSampleRate = 22050;
inline constexpr int kFrameLen = 441;  // 20 ms
inline constexpr int kHop = 220;       // 10 ms

// Mono waveform with amplitudes normalized to [-1, 1].
struct Signal {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_s() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

enum class CurveKind { MaxAmplitude, FrameEnergy };

struct EnergyCurve {
  int hop_samples = kHop;
  int frame_len_samples = kFrameLen;
  std::vector<double> values;
  CurveKind kind = CurveKind::FrameEnergy;
};

// Throws UnsupportedRate unless the signal runs at the pipeline rate.
void require_pipeline_rate(const Signal& signal);

// floor((n - frame_len) / hop) + 1; throws FrameLongerThanSignal if n < frame_len.
std::size_t frame_count(std::size_t n, int frame_len, int hop);

Signal read_wav(const std::filesystem::path& path);
Signal decode_wav(std::span<const std::uint8_t> bytes);

void write_wav(const Signal& signal, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_wav(const Signal& signal);

EnergyCurve max_amp_envelope(std::span<const double> samples, int frame_len = kFrameLen,
                             int hop = kHop);
EnergyCurve frame_energy_curve(std::span<const double> samples, int frame_len = kFrameLen,
                               int hop = kHop);

inline EnergyCurve max_amp_envelope(const Signal& s, int frame_len = kFrameLen, int hop = kHop) {
  return max_amp_envelope(std::span<const double>(s.samples), frame_len, hop);
}
inline EnergyCurve frame_energy_curve(const Signal& s, int frame_len = kFrameLen,
                                      int hop = kHop) {
  return frame_energy_curve(std::span<const double>(s.samples), frame_len, hop);
}

}  // namespace hnmsing
