#include "hnmsing/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fileio.hpp"
#include "hnmsing/error.hpp"
#include "hnmsing/spline.hpp"
#include "parallel.hpp"

namespace hnmsing {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEnergyFloor = 1e-9;
constexpr double kMaxGain = 8.0;
constexpr double kNormalizedPeak = 0.89;  // -1 dBFS

std::vector<Span> present_spans(const SyllableSegmentation& s) { return s.spans(); }

SyllableSegmentation from_durations(const SyllableSegmentation& shape,
                                    std::span<const std::int64_t> durations) {
  SyllableSegmentation out;
  std::int64_t at = 0;
  std::size_t i = 0;
  const auto next = [&] {
    const Span s{at, at + durations[i++]};
    at = s.end;
    return s;
  };
  if (shape.cx) out.cx = next();
  out.a = next();
  out.s = next();
  out.r = next();
  if (shape.cn) out.cn = next();
  return out;
}

SyllableSegmentation shifted(const SyllableSegmentation& s, std::int64_t by) {
  SyllableSegmentation out = s;
  const auto mv = [by](Span sp) { return Span{sp.begin + by, sp.end + by}; };
  if (out.cx) out.cx = mv(*out.cx);
  out.a = mv(out.a);
  out.s = mv(out.s);
  out.r = mv(out.r);
  if (out.cn) out.cn = mv(*out.cn);
  return out;
}

double plain_f0(const MergedNote& note, double t_abs) {
  const auto& subs = note.sub_notes;
  if (subs.empty()) throw Error(ErrorKind::AlignmentMismatch, "note without keys");
  double f = key_to_hz(subs.front().key);
  for (std::size_t i = 1; i < subs.size(); ++i) {
    const auto& prev = subs[i - 1];
    const auto& cur = subs[i];
    if (t_abs < cur.onset_s) return f;
    const double next_f = key_to_hz(cur.key);
    // Glide across the overlap of consecutive sub-notes.
    if (prev.offset_s > cur.onset_s && t_abs < prev.offset_s) {
      const double u = (t_abs - cur.onset_s) / (prev.offset_s - cur.onset_s);
      return f + u * (next_f - f);
    }
    f = next_f;
  }
  return f;
}

// Pitch target as a function of time on the expression's syllable timeline.
class ExpressivePitch {
 public:
  ExpressivePitch(const PitchCurve& curve, double fallback) : fallback_(fallback) {
    for (std::size_t i = 0; i < curve.frames.size(); ++i) {
      if (curve.frames[i]) {
        t_.push_back(curve.time_at(i));
        f_.push_back(*curve.frames[i]);
      }
    }
    if (t_.size() >= 2) spline_.emplace(t_, f_);
  }

  double operator()(double t) const {
    if (spline_) return (*spline_)(t);
    return f_.empty() ? fallback_ : f_.front();
  }

 private:
  std::vector<double> t_, f_;
  std::optional<CubicSpline> spline_;
  double fallback_;
};

std::int64_t extension(std::int64_t segment_len, const RenderOptions& o, int sr) {
  return std::min<std::int64_t>(std::llround(o.extension_ratio * static_cast<double>(segment_len)),
                                std::llround(o.extension_cap_s * sr));
}

bool is_unvoiced(InitialCategory c) {
  return c == InitialCategory::Stop || c == InitialCategory::Fricative;
}

std::uint64_t syllable_seed(std::uint64_t seed, std::size_t i) {
  return seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(i) + 1);
}

}  // namespace

std::string_view to_string(JoinKind kind) noexcept {
  switch (kind) {
    case JoinKind::VoicedTransition: return "voiced_transition";
    case JoinKind::FricativeOverlap: return "fricative_overlap";
    case JoinKind::Pause: return "pause";
  }
  return "pause";
}

double TimeMap::map_to_source(double t) const {
  if (pairs.empty()) throw Error(ErrorKind::SegmentSetMismatch, "empty time map");
  const auto& first = pairs.front();
  const auto& last = pairs.back();
  if (t < static_cast<double>(first.second.begin)) {
    return static_cast<double>(first.first.begin) + (t - static_cast<double>(first.second.begin));
  }
  if (t >= static_cast<double>(last.second.end)) {
    return static_cast<double>(last.first.end) + (t - static_cast<double>(last.second.end));
  }
  const std::pair<Span, Span>* piece = &first;
  for (const auto& p : pairs) {
    if (p.second.length() > 0 && static_cast<double>(p.second.begin) <= t) piece = &p;
  }
  const auto& [x, y] = *piece;
  return static_cast<double>(x.begin) +
         (t - static_cast<double>(y.begin)) * static_cast<double>(x.length()) /
             static_cast<double>(y.length());
}

TimeMap build_time_map(const SyllableSegmentation& source, const SyllableSegmentation& target) {
  if (source.cx.has_value() != target.cx.has_value() ||
      source.cn.has_value() != target.cn.has_value()) {
    throw Error(ErrorKind::SegmentSetMismatch, "source and target differ in present segments");
  }
  if (!source.contiguous() || !target.contiguous()) {
    throw Error(ErrorKind::SegmentSetMismatch, "segments must be contiguous");
  }
  if (target.length() <= 0) throw Error(ErrorKind::SegmentSetMismatch, "empty target segmentation");
  TimeMap m;
  const auto xs = present_spans(source);
  const auto ys = present_spans(target);
  for (std::size_t i = 0; i < xs.size(); ++i) m.pairs.emplace_back(xs[i], ys[i]);
  return m;
}

SyllableSegmentation plan_plain_targets(const ScoredSyllable& syllable, const SyllableUnit& unit,
                                        PlanMode mode) {
  const double dur = syllable.note.t_off - syllable.note.t_on;
  const auto target = std::llround(dur * unit.sample_rate);
  if (target <= 0) {
    throw Error(ErrorKind::NonPositiveTargetDuration,
                "note of '" + syllable.lyric + "' lasts " + std::to_string(dur) + " s");
  }
  const auto& src = unit.segmentation;
  std::vector<std::int64_t> d;
  for (const auto& s : present_spans(src)) d.push_back(s.length());
  const std::size_t s_index = src.cx ? 2 : 1;
  std::int64_t total = 0;
  for (auto v : d) total += v;
  const std::int64_t fixed = total - d[s_index];

  if (mode == PlanMode::AbsorbInSustain && target >= fixed) {
    d[s_index] = target - fixed;
  } else {
    // Linear compression of every segment, rounding cumulative boundaries.
    std::int64_t cum = 0, prev = 0;
    for (auto& v : d) {
      cum += v;
      const auto b = std::llround(static_cast<double>(cum) * static_cast<double>(target) /
                                  static_cast<double>(total));
      v = b - prev;
      prev = b;
    }
  }
  auto out = from_durations(src, d);
  out.t_v = syllable.note.t_on;
  return out;
}

std::vector<std::int64_t> place_control_points(std::int64_t target_len) {
  std::vector<std::int64_t> p;
  for (std::int64_t t = 0; t < std::max<std::int64_t>(target_len, 1); t += kControlSpacing) {
    p.push_back(t);
  }
  if (target_len > 1 && p.back() != target_len - 1) p.push_back(target_len - 1);
  return p;
}

HnmFrame sample_hnm_at(const SyllableUnit& unit, const TimeMap& map, double t_target) {
  const auto span = map.target();
  if (!(t_target >= static_cast<double>(span.begin) && t_target <= static_cast<double>(span.end))) {
    throw Error(ErrorKind::OutOfSpan, "target sample " + std::to_string(t_target) +
                                          " outside [" + std::to_string(span.begin) + ", " +
                                          std::to_string(span.end) + "]");
  }
  return interpolate_frames(unit.frames, map.map_to_source(t_target) / unit.sample_rate);
}

HnmFrame retune_frame(const HnmFrame& frame, double target_f0) {
  if (!frame.voiced() || frame.harmonics.empty()) {
    throw Error(ErrorKind::UnvoicedFrame, "cannot retune an unvoiced frame");
  }
  if (!(target_f0 >= kMinF0 && target_f0 <= kMaxF0)) {
    throw Error(ErrorKind::TargetF0OutOfRange, std::to_string(target_f0) + " Hz");
  }
  const std::size_t k_new = harmonic_count(frame.mvf, target_f0);
  if (k_new == 0) {
    throw Error(ErrorKind::RetuneCollapse, "no harmonic of " + std::to_string(target_f0) +
                                               " Hz below mvf " + std::to_string(frame.mvf));
  }
  const std::size_t k_old = frame.harmonics.size();
  std::vector<double> x(k_old), amp(k_old), phase(k_old);
  for (std::size_t k = 0; k < k_old; ++k) {
    x[k] = static_cast<double>(k + 1) * frame.f0;
    amp[k] = frame.harmonics[k].amplitude;
    phase[k] = frame.harmonics[k].phase;
    if (k > 0) {
      const double d = phase[k] - phase[k - 1];
      phase[k] -= kTwoPi * std::round(d / kTwoPi);
    }
  }

  HnmFrame out = frame;
  out.f0 = target_f0;
  out.harmonics.assign(k_new, Harmonic{});
  if (k_old == 1) {
    for (auto& h : out.harmonics) h = frame.harmonics.front();
    return out;
  }
  const CubicSpline amp_env(x, amp);
  CubicSpline phase_env(x, phase);
  phase_env.set_extrapolate_linear(true);
  for (std::size_t k = 0; k < k_new; ++k) {
    const double f = static_cast<double>(k + 1) * target_f0;
    out.harmonics[k].amplitude = std::max(0.0, amp_env(f));
    out.harmonics[k].phase = wrap_phase(phase_env(f));
  }
  return out;
}

ShiftedCurve pitch_shift_curve(const PitchCurve& curve, int semitones) {
  ShiftedCurve out{curve, std::vector<bool>(curve.frames.size(), false)};
  const double ratio = std::exp2(static_cast<double>(semitones) / 12.0);
  for (std::size_t i = 0; i < out.curve.frames.size(); ++i) {
    auto& v = out.curve.frames[i];
    if (!v) continue;
    *v *= ratio;
    out.out_of_range[i] = *v < kMinF0 || *v > kMaxF0;
  }
  return out;
}

ExpressionParams plain_expression(const ScoredSyllable& syllable, const SyllableUnit& unit,
                                  PlanMode mode) {
  ExpressionParams e;
  e.lyric = syllable.lyric;
  e.note = syllable.note;
  e.segmentation = plan_plain_targets(syllable, unit, mode);
  e.t_v = syllable.note.t_on;
  e.onset_dev = 0.0;
  e.energy.values.clear();
  return e;
}

RenderedSyllable render_syllable(const SyllableUnit& unit, const ExpressionParams& expr,
                                 SynthMode mode, std::uint64_t noise_seed,
                                 const RenderOptions& options) {
  if (unit.sample_rate != kSampleRate) {
    throw Error(ErrorKind::UnsupportedRate, "unit '" + unit.pinyin + "' at " +
                                                std::to_string(unit.sample_rate) + " Hz");
  }
  const bool lyric_ok = expr.sliding
                            ? expr.lyric.size() > 1 && unit.pinyin.ends_with(expr.lyric.substr(1))
                            : unit.pinyin == expr.lyric;
  if (!lyric_ok) {
    throw Error(ErrorKind::LyricMismatch, "unit '" + unit.pinyin + "' for lyric '" + expr.lyric + "'");
  }
  const int sr = unit.sample_rate;

  SyllableSegmentation source = unit.segmentation;
  if (expr.sliding) source.cx.reset();

  RenderedSyllable r;
  r.initial = expr.sliding ? InitialCategory::Null : classify_initial(expr.lyric);
  SyllableSegmentation target;
  if (mode == SynthMode::Plain) {
    target = plan_plain_targets(ScoredSyllable{expr.lyric, expr.note}, unit, options.plan);
    r.origin = 0;
  } else {
    r.origin = expr.segmentation.begin();
    target = shifted(expr.segmentation, -r.origin);
  }
  target.t_v = expr.t_v;
  r.segmentation = target;
  const TimeMap map = build_time_map(source, target);

  const auto spans = target.spans();
  r.head_ext = extension(spans.front().length(), options, sr);
  if (r.initial == InitialCategory::Fricative) {
    r.fricative_ext = std::llround(options.fricative_overlap_s * sr);
    r.head_ext = std::max(r.head_ext, r.fricative_ext);
  }
  r.tail_ext = extension(spans.back().length(), options, sr);
  r.vowel_onset_sample = r.head_ext + target.a.begin;
  r.pre_roll_samples =
      std::max<std::int64_t>(0, r.vowel_onset_sample - std::llround(expr.onset_dev * sr));

  const double ratio = std::exp2(static_cast<double>(options.transpose) / 12.0);
  const double fallback = expr.note.sub_notes.empty() ? 0.0 : key_to_hz(expr.note.sub_notes.front().key);
  const ExpressivePitch expressive(pitch_shift_curve(expr.pitch, options.transpose).curve,
                                   fallback * ratio);
  const auto target_f0 = [&](std::int64_t t_core) {
    if (mode == SynthMode::Plain) {
      const double t_abs = expr.t_v + static_cast<double>(t_core - target.a.begin) / sr;
      return plain_f0(expr.note, t_abs) * ratio;
    }
    return expressive(static_cast<double>(t_core + r.origin) / sr);
  };

  const std::int64_t n = r.head_ext + target.length() + r.tail_ext;
  ControlPointGrid grid;
  grid.positions = place_control_points(n);
  grid.frames.reserve(grid.positions.size());
  for (std::size_t i = 0; i < grid.positions.size(); ++i) {
    const std::int64_t t_core = grid.positions[i] - r.head_ext;
    HnmFrame f = interpolate_frames(unit.frames, map.map_to_source(static_cast<double>(t_core)) / sr);
    if (f.voiced() && !f.harmonics.empty()) {
      const double want = std::clamp(target_f0(t_core), kMinF0, kMaxF0);
      // Keep at least the fundamental when the unit's voiced band is narrower.
      if (harmonic_count(f.mvf, want) == 0) f.mvf = want;
      f = retune_frame(f, want);
    }
    r.controls.push_back({i, grid.positions[i], f.f0, 1.0});
    grid.frames.push_back(std::move(f));
  }
  r.samples = synthesize_stream(grid, static_cast<std::size_t>(n), noise_seed, sr);
  return r;
}

void apply_dynamics(RenderedSyllable& r, const ExpressionParams& expr) {
  if (r.core_length() != expr.segmentation.length() || r.origin != expr.segmentation.begin()) {
    throw Error(ErrorKind::AlignmentMismatch, "rendered syllable does not match the expression timeline");
  }
  auto& x = r.samples.samples;
  const auto n = static_cast<std::int64_t>(x.size());
  const bool unvoiced_initial = is_unvoiced(r.initial) && r.segmentation.cx.has_value();
  const std::int64_t voiced_from = unvoiced_initial ? r.vowel_onset_sample : 0;

  if (unvoiced_initial && voiced_from > 0) {
    double peak = 0.0;
    for (std::int64_t i = 0; i < voiced_from; ++i) peak = std::max(peak, std::abs(x[static_cast<std::size_t>(i)]));
    if (peak > 0.0) {
      const double scale = expr.unvoiced_peak / peak;
      for (std::int64_t i = 0; i < voiced_from; ++i) x[static_cast<std::size_t>(i)] *= scale;
    }
  }

  const auto& energy = expr.energy;
  if (voiced_from >= n) return;
  if (energy.values.empty() || energy.hop_samples <= 0) {
    throw Error(ErrorKind::AlignmentMismatch, "expression of '" + expr.lyric + "' has no energy curve");
  }
  const auto frames = static_cast<std::int64_t>(energy.values.size());
  const std::int64_t fl = energy.frame_len_samples;
  const std::int64_t hop = energy.hop_samples;
  const std::int64_t core_end = r.head_ext + r.core_length();

  // Gain per control point from the target frame nearest to it.
  std::vector<std::int64_t> at;
  std::vector<double> gain;
  for (auto& c : r.controls) {
    if (c.sample < voiced_from) continue;
    const std::int64_t p = std::min(c.sample, core_end - 1);
    const std::int64_t ts = p - r.head_ext + r.origin;
    const auto i = std::clamp<std::int64_t>(
        std::llround(static_cast<double>(ts - (fl - 1) / 2) / static_cast<double>(hop)), 0, frames - 1);
    const std::int64_t ws = r.head_ext + i * hop - r.origin;
    double e = 0.0;
    for (std::int64_t k = std::max<std::int64_t>(ws, 0); k < std::min(ws + fl, n); ++k) {
      e += x[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
    }
    const double g = std::clamp(std::sqrt(energy.values[static_cast<std::size_t>(i)] /
                                          std::max(e, kEnergyFloor)),
                                0.0, kMaxGain);
    c.gain = g;
    at.push_back(c.sample);
    gain.push_back(g);
  }
  if (at.empty()) return;
  std::size_t j = 0;
  for (std::int64_t s = voiced_from; s < n; ++s) {
    while (j + 1 < at.size() && at[j + 1] <= s) ++j;
    double g = gain[j];
    if (s < at.front()) {
      g = gain.front();
    } else if (j + 1 < at.size()) {
      const double u = static_cast<double>(s - at[j]) / static_cast<double>(at[j + 1] - at[j]);
      g = gain[j] + u * (gain[j + 1] - gain[j]);
    }
    x[static_cast<std::size_t>(s)] *= g;
  }
}

JoinResult join_syllables(std::vector<RenderedSyllable>& rendered,
                          std::span<const ExpressionParams> exprs) {
  if (rendered.size() != exprs.size()) {
    throw Error(ErrorKind::AlignmentMismatch, std::to_string(rendered.size()) +
                                                  " rendered syllables vs " +
                                                  std::to_string(exprs.size()) + " expressions");
  }
  JoinResult out;
  const std::size_t m = rendered.size();
  if (m == 0) return out;
  const int sr = rendered.front().samples.sample_rate;

  std::vector<std::int64_t> anchor(m), start(m), core_begin(m), core_end(m);
  for (std::size_t i = 0; i < m; ++i) {
    anchor[i] = std::llround((exprs[i].note.t_on + exprs[i].onset_dev) * sr);
    if (i > 0 && anchor[i] <= anchor[i - 1]) {
      throw Error(ErrorKind::NonMonotoneOnsets,
                  "vowel onset of syllable " + std::to_string(i) + " does not follow its predecessor");
    }
    start[i] = anchor[i] - rendered[i].vowel_onset_sample;
    core_begin[i] = start[i] + rendered[i].head_ext;
    core_end[i] = core_begin[i] + rendered[i].core_length();
  }

  // Per-sample weights; extensions stay silent unless a join uses them.
  std::vector<std::vector<double>> w(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& r = rendered[i];
    w[i].assign(r.samples.size(), 0.0);
    std::fill(w[i].begin() + r.head_ext, w[i].begin() + r.head_ext + r.core_length(), 1.0);
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    auto& prev = rendered[i];
    auto& next = rendered[i + 1];
    const std::int64_t gap = core_begin[i + 1] - core_end[i];
    JoinKind kind = JoinKind::VoicedTransition;
    if (gap > 0 || next.initial == InitialCategory::Stop) {
      kind = JoinKind::Pause;
    } else if (next.initial == InitialCategory::Fricative) {
      kind = JoinKind::FricativeOverlap;
    }
    out.kinds.push_back(kind);
    prev.join_next = kind;
    next.join_prev = kind;

    if (kind == JoinKind::FricativeOverlap) {
      const auto from = next.head_ext - next.fricative_ext;
      std::fill(w[i + 1].begin() + from, w[i + 1].begin() + next.head_ext, 1.0);
    } else if (kind == JoinKind::VoicedTransition) {
      const std::int64_t rb = start[i + 1];
      const std::int64_t re = core_end[i] + prev.tail_ext;
      if (re <= rb) continue;
      const double len = static_cast<double>(re - rb);
      for (std::int64_t g = rb; g < re; ++g) {
        const double u = (static_cast<double>(g - rb) + 0.5) / len;
        const auto pi = g - start[i];
        const auto ni = g - start[i + 1];
        if (pi >= 0 && pi < static_cast<std::int64_t>(w[i].size())) {
          w[i][static_cast<std::size_t>(pi)] = 1.0 - u;
        }
        if (ni >= 0 && ni < static_cast<std::int64_t>(w[i + 1].size())) {
          w[i + 1][static_cast<std::size_t>(ni)] = u;
        }
      }
    }
  }

  std::int64_t first = 0, last = 0;
  bool any = false;
  for (std::size_t i = 0; i < m; ++i) {
    const auto nz = std::find_if(w[i].begin(), w[i].end(), [](double v) { return v != 0.0; });
    if (nz == w[i].end()) continue;
    const auto lz = std::find_if(w[i].rbegin(), w[i].rend(), [](double v) { return v != 0.0; });
    const std::int64_t b = start[i] + (nz - w[i].begin());
    const std::int64_t e = start[i] + static_cast<std::int64_t>(w[i].rend() - lz);
    first = any ? std::min(first, b) : b;
    last = any ? std::max(last, e) : e;
    any = true;
  }
  if (first < 0) {
    out.front_pad = -first;
    out.warnings.push_back("NegativePlacement: first syllable starts " + std::to_string(-first) +
                           " samples before 0; padded with silence");
  }

  out.signal.sample_rate = sr;
  out.signal.samples.assign(static_cast<std::size_t>(std::max<std::int64_t>(last + out.front_pad, 0)), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& x = rendered[i].samples.samples;
    const std::int64_t base = start[i] + out.front_pad;
    out.starts.push_back(base);
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (w[i][k] == 0.0) continue;
      out.signal.samples[static_cast<std::size_t>(base + static_cast<std::int64_t>(k))] += w[i][k] * x[k];
    }
  }
  double peak = 0.0;
  for (double v : out.signal.samples) peak = std::max(peak, std::abs(v));
  if (peak > 1.0) {
    const double g = kNormalizedPeak / peak;
    for (double& v : out.signal.samples) v *= g;
  }
  return out;
}

PhraseResult synthesize_phrase(std::span<const ScoredSyllable> score, const Corpus& corpus,
                               const ExpressionDocument* expression, const PhraseOptions& options) {
  PhraseResult out;
  std::vector<const SyllableUnit*> units;
  if (options.mode == SynthMode::Plain) {
    for (const auto& s : score) {
      units.push_back(&corpus.unit(s.lyric));
      out.exprs.push_back(plain_expression(s, *units.back(), options.render.plan));
    }
  } else {
    if (expression == nullptr) {
      throw Error(ErrorKind::AlignmentMismatch, "expressive synthesis needs an expression document");
    }
    std::size_t scored = 0;
    for (const auto& e : expression->syllables) {
      if (e.sliding) {
        if (units.empty()) throw Error(ErrorKind::LyricMismatch, "sliding syllable opens the phrase");
        units.push_back(units.back());
      } else {
        if (scored >= score.size() || score[scored].lyric != e.lyric) {
          throw Error(ErrorKind::LyricMismatch,
                      "expression syllable '" + e.lyric + "' does not follow the score lyrics");
        }
        ++scored;
        units.push_back(&corpus.unit(e.lyric));
      }
      out.exprs.push_back(e);
    }
    if (scored != score.size()) {
      throw Error(ErrorKind::LyricMismatch, "expression covers " + std::to_string(scored) + " of " +
                                                std::to_string(score.size()) + " syllables");
    }
  }

  out.syllables.resize(out.exprs.size());
  detail::parallel_for(out.exprs.size(), options.jobs, [&](std::size_t i) {
    auto r = render_syllable(*units[i], out.exprs[i], options.mode,
                             syllable_seed(options.seed, i), options.render);
    if (options.mode == SynthMode::Expressive) apply_dynamics(r, out.exprs[i]);
    out.syllables[i] = std::move(r);
  });
  out.join = join_syllables(out.syllables, out.exprs);
  return out;
}

void write_control_csv(const PhraseResult& result, const std::filesystem::path& path) {
  std::ostringstream ss;
  ss << "syllable,index,sample,f0,gain\n";
  ss.precision(10);
  for (std::size_t i = 0; i < result.syllables.size(); ++i) {
    const auto base = i < result.join.starts.size() ? result.join.starts[i] : 0;
    for (const auto& c : result.syllables[i].controls) {
      ss << i << ',' << c.index << ',' << base + c.sample << ',' << c.f0 << ',' << c.gain << '\n';
    }
  }
  detail::write_text_file(path, ss.str());
}

}  // namespace hnmsing
