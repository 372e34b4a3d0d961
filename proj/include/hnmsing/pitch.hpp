#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hnmsing/score.hpp"
#include "hnmsing/signal_io.hpp"

namespace hnmsing {

inline constexpr double kMinF0 = 60.0;
inline constexpr double kMaxF0 = 500.0;

// Frame-level f0 track. Frame i is centred at start_s + i * hop_s.
struct PitchCurve {
  double hop_s = static_cast<double>(kHop) / kSampleRate;
  double start_s = 0.5 * kFrameLen / kSampleRate;
  std::vector<std::optional<double>> frames;

  double time_at(std::size_t i) const noexcept { return start_s + static_cast<double>(i) * hop_s; }
  // Nearest frame value; nullopt outside the curve or when unvoiced.
  std::optional<double> value_near(double t) const;
  std::size_t voiced_count() const;

  friend bool operator==(const PitchCurve&, const PitchCurve&) = default;
};

// Autocorrelation R(k) (sum of lagged products) and mean AMDF M(k) over the
// inclusive lag range, after mean removal.
struct LagScores {
  int min_lag = 0;
  int max_lag = 0;
  std::vector<double> r;
  std::vector<double> m;
  double energy = 0.0;  // R(0)
};

int min_pitch_lag(int sample_rate) noexcept;  // ceil(sr / 500)
int max_pitch_lag(int sample_rate) noexcept;  // floor(sr / 60)

LagScores lag_scores(std::span<const double> frame, int sample_rate);

struct PitchDecision {
  int lag = 0;  // argmax of R(k) / (M(k) + 1)
  bool voiced = false;
  double f0 = 0.0;
};

PitchDecision decide_pitch(const LagScores& scores, int sample_rate);

// f0 for a 20 ms frame, or nullopt when unvoiced.
std::optional<double> detect_pitch_frame(std::span<const double> frame, int sample_rate);

double correct_octave(double f0, double guide_hz);

struct FrameParams {
  int frame_len = kFrameLen;
  int hop = kHop;
};

// guide is indexed by frame (empty span: no correction).
PitchCurve extract_pitch_curve(const Signal& signal,
                               std::span<const std::optional<double>> guide = {},
                               FrameParams params = {});

// Score key active at each frame centre; offset_s is the absolute time of sample 0.
std::vector<std::optional<double>> guide_from_notes(std::span<const MergedNote> notes,
                                                    std::size_t n_frames, double offset_s,
                                                    FrameParams params = {},
                                                    int sample_rate = kSampleRate);

}  // namespace hnmsing
