#include "hnmsing/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hnmsing/error.hpp"

namespace hnmsing {

std::optional<double> PitchCurve::value_near(double t) const {
  if (frames.empty() || hop_s <= 0.0) return std::nullopt;
  const double idx = std::round((t - start_s) / hop_s);
  if (idx < 0.0 || idx >= static_cast<double>(frames.size())) return std::nullopt;
  return frames[static_cast<std::size_t>(idx)];
}

std::size_t PitchCurve::voiced_count() const {
  return static_cast<std::size_t>(
      std::count_if(frames.begin(), frames.end(), [](const auto& f) { return f.has_value(); }));
}

int min_pitch_lag(int sample_rate) noexcept {
  return static_cast<int>(std::ceil(sample_rate / kMaxF0));
}

int max_pitch_lag(int sample_rate) noexcept {
  return static_cast<int>(std::floor(sample_rate / kMinF0));
}

LagScores lag_scores(std::span<const double> frame, int sample_rate) {
  const int expected = static_cast<int>(std::lround(0.02 * sample_rate));
  if (static_cast<int>(frame.size()) != expected) {
    throw Error(ErrorKind::BadFrameLength, "pitch frame must hold " + std::to_string(expected) +
                                               " samples, got " + std::to_string(frame.size()));
  }
  const std::size_t n = frame.size();
  const double mean = std::accumulate(frame.begin(), frame.end(), 0.0) / static_cast<double>(n);
  std::vector<double> x(n);
  std::transform(frame.begin(), frame.end(), x.begin(), [mean](double v) { return v - mean; });

  LagScores s;
  s.min_lag = min_pitch_lag(sample_rate);
  s.max_lag = std::min(max_pitch_lag(sample_rate), static_cast<int>(n) - 1);
  const std::size_t count = static_cast<std::size_t>(s.max_lag - s.min_lag + 1);
  s.r.resize(count);
  s.m.resize(count);
  for (double v : x) s.energy += v * v;
  for (int k = s.min_lag; k <= s.max_lag; ++k) {
    double r = 0.0;
    double m = 0.0;
    for (std::size_t t = 0; t + static_cast<std::size_t>(k) < n; ++t) {
      r += x[t] * x[t + k];
      m += std::abs(x[t] - x[t + k]);
    }
    // R stays a plain sum so R(0) is the frame energy; M is the mean AMDF.
    s.r[static_cast<std::size_t>(k - s.min_lag)] = r;
    s.m[static_cast<std::size_t>(k - s.min_lag)] = m / static_cast<double>(n - static_cast<std::size_t>(k));
  }
  return s;
}

PitchDecision decide_pitch(const LagScores& s, int sample_rate) {
  PitchDecision d;
  if (s.r.empty()) return d;
  std::size_t best = 0;
  double best_score = s.r[0] / (s.m[0] + 1.0);
  for (std::size_t i = 1; i < s.r.size(); ++i) {
    const double score = s.r[i] / (s.m[i] + 1.0);
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  d.lag = s.min_lag + static_cast<int>(best);
  d.f0 = static_cast<double>(sample_rate) / d.lag;

  const auto [mn, mx] = std::minmax_element(s.m.begin(), s.m.end());
  const bool low_correlation = s.energy <= 0.0 || s.r[best] < s.energy / 4.0;
  // All-zero AMDF (silence) has no defined ratio and counts as unvoiced; a zero
  // minimum with a positive maximum is an unbounded ratio.
  bool flat_amdf;
  if (*mx <= 0.0) {
    flat_amdf = true;
  } else if (*mn <= 0.0) {
    flat_amdf = false;
  } else {
    flat_amdf = *mx / *mn < 2.0;
  }
  d.voiced = !(low_correlation || flat_amdf);
  return d;
}

std::optional<double> detect_pitch_frame(std::span<const double> frame, int sample_rate) {
  const auto d = decide_pitch(lag_scores(frame, sample_rate), sample_rate);
  if (!d.voiced) return std::nullopt;
  return d.f0;
}

double correct_octave(double f0, double guide_hz) {
  if (!(f0 > 0.0) || !(guide_hz > 0.0)) {
    throw Error(ErrorKind::NonPositiveInput, "f0 and guide must be positive");
  }
  const double target = std::log2(guide_hz);
  double best = f0;
  double best_dist = std::abs(std::log2(f0) - target);
  for (double cand : {f0 / 2.0, f0 * 2.0}) {
    if (cand < kMinF0 || cand > kMaxF0) continue;
    const double dist = std::abs(std::log2(cand) - target);
    if (dist < best_dist) {
      best = cand;
      best_dist = dist;
    }
  }
  return best;
}

PitchCurve extract_pitch_curve(const Signal& signal, std::span<const std::optional<double>> guide,
                               FrameParams params) {
  require_pipeline_rate(signal);
  const std::size_t n = frame_count(signal.size(), params.frame_len, params.hop);
  PitchCurve curve;
  curve.hop_s = static_cast<double>(params.hop) / signal.sample_rate;
  curve.start_s = 0.5 * params.frame_len / signal.sample_rate;
  curve.frames.resize(n);
  const std::span<const double> all(signal.samples);
  for (std::size_t i = 0; i < n; ++i) {
    auto f0 = detect_pitch_frame(all.subspan(i * params.hop, params.frame_len),
                                 signal.sample_rate);
    if (f0 && i < guide.size() && guide[i]) f0 = correct_octave(*f0, *guide[i]);
    curve.frames[i] = f0;
  }
  return curve;
}

std::vector<std::optional<double>> guide_from_notes(std::span<const MergedNote> notes,
                                                    std::size_t n_frames, double offset_s,
                                                    FrameParams params, int sample_rate) {
  std::vector<std::optional<double>> guide(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const double t =
        offset_s + (static_cast<double>(i * params.hop) + 0.5 * params.frame_len) / sample_rate;
    for (const auto& note : notes) {
      if (t < note.t_on || t >= note.t_off) continue;
      // Latest-starting sub-note that is sounding wins inside a portamento group.
      const SubNote* active = nullptr;
      for (const auto& sub : note.sub_notes) {
        if (sub.onset_s <= t && t < sub.offset_s) active = &sub;
      }
      if (active == nullptr) active = &note.sub_notes.front();
      guide[i] = key_to_hz(active->key);
    }
  }
  return guide;
}

}  // namespace hnmsing
