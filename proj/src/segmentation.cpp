#include "hnmsing/segmentation.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "hnmsing/error.hpp"
#include "spectrum.hpp"

namespace hnmsing {
namespace {

constexpr std::size_t kFeatureFft = 512;

int kind_rank(SegmentKind k) { return static_cast<int>(k); }

std::optional<SegmentKind> parse_kind(std::string_view s) {
  for (auto k : {SegmentKind::Syllable, SegmentKind::Initial, SegmentKind::Attack,
                 SegmentKind::Sustain, SegmentKind::Release, SegmentKind::NasalEnd}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

// Frames fully inside [lo, hi) with start positions lo, lo + hop, ...
struct FrameGrid {
  std::int64_t lo = 0;
  std::size_t count = 0;
};

FrameGrid grid_over(std::int64_t lo, std::int64_t hi, int frame_len, int hop) {
  if (hi - lo < frame_len) return {lo, 0};
  return {lo, static_cast<std::size_t>((hi - lo - frame_len) / hop + 1)};
}

std::vector<std::vector<double>> frame_spectra(std::span<const double> samples, int frame_len,
                                               int hop) {
  const auto grid = grid_over(0, static_cast<std::int64_t>(samples.size()), frame_len, hop);
  const auto window = detail::hamming(static_cast<std::size_t>(frame_len));
  const std::size_t fft = std::max<std::size_t>(kFeatureFft, std::bit_ceil(
                                                                 static_cast<std::size_t>(frame_len)));
  std::vector<std::vector<double>> out;
  out.reserve(grid.count);
  for (std::size_t j = 0; j < grid.count; ++j) {
    out.push_back(detail::magnitude_spectrum(samples.subspan(j * hop, frame_len), window, fft));
  }
  return out;
}

}  // namespace

std::string_view to_string(SegmentKind kind) noexcept {
  switch (kind) {
    case SegmentKind::Syllable: return "syllable";
    case SegmentKind::Initial: return "initial";
    case SegmentKind::Attack: return "attack";
    case SegmentKind::Sustain: return "sustain";
    case SegmentKind::Release: return "release";
    case SegmentKind::NasalEnd: return "nasal_end";
  }
  return "syllable";
}

std::string_view to_string(InitialCategory c) noexcept {
  switch (c) {
    case InitialCategory::Stop: return "stop";
    case InitialCategory::Fricative: return "fricative";
    case InitialCategory::Nasal: return "nasal";
    case InitialCategory::Glide: return "glide";
    case InitialCategory::Null: return "null";
  }
  return "null";
}

std::vector<Span> SyllableSegmentation::spans() const {
  std::vector<Span> out;
  if (cx) out.push_back(*cx);
  out.push_back(a);
  out.push_back(s);
  out.push_back(r);
  if (cn) out.push_back(*cn);
  return out;
}

bool SyllableSegmentation::contiguous() const noexcept {
  const auto all = spans();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].end < all[i].begin) return false;
    if (i > 0 && all[i].begin != all[i - 1].end) return false;
  }
  return true;
}

SegmentLabels parse_labels(std::string_view text) {
  SegmentLabels labels;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;

    const auto fields = split_tabs(line);
    LabelEntry e;
    const auto bad = [line_no](const std::string& why) {
      return Error(ErrorKind::BadLine, "line " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() < 3 || fields.size() > 4) throw bad("expected 3 or 4 tab-separated fields");
    if (!parse_int(fields[0], e.span.begin) || !parse_int(fields[1], e.span.end)) {
      throw bad("sample indices must be integers");
    }
    if (e.span.begin < 0 || e.span.begin >= e.span.end) throw bad("need 0 <= start < end");
    const auto kind = parse_kind(fields[2]);
    if (!kind) throw bad("unknown segment kind '" + std::string(fields[2]) + "'");
    e.kind = *kind;
    if (fields.size() == 4) e.text = std::string(fields[3]);
    labels.entries.push_back(std::move(e));
  }

  std::stable_sort(labels.entries.begin(), labels.entries.end(),
                   [](const LabelEntry& a, const LabelEntry& b) {
                     if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
                     return kind_rank(a.kind) < kind_rank(b.kind);
                   });

  std::vector<Span> syllables;
  for (const auto& e : labels.entries) {
    if (e.kind != SegmentKind::Syllable) continue;
    if (!syllables.empty() && e.span.begin < syllables.back().end) {
      throw Error(ErrorKind::OverlappingSyllables,
                  "syllable at " + std::to_string(e.span.begin) + " overlaps the one ending at " +
                      std::to_string(syllables.back().end));
    }
    syllables.push_back(e.span);
  }
  for (const auto& e : labels.entries) {
    if (e.kind == SegmentKind::Syllable) continue;
    const bool nested = std::any_of(syllables.begin(), syllables.end(),
                                    [&](const Span& s) { return s.contains(e.span); });
    if (!nested) {
      throw Error(ErrorKind::OrphanSubSegment,
                  std::string(to_string(e.kind)) + " [" + std::to_string(e.span.begin) + ", " +
                      std::to_string(e.span.end) + ") lies outside every syllable");
    }
  }
  return labels;
}

std::string serialize_labels(const SegmentLabels& labels) {
  auto entries = labels.entries;
  std::stable_sort(entries.begin(), entries.end(), [](const LabelEntry& a, const LabelEntry& b) {
    if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
    return kind_rank(a.kind) < kind_rank(b.kind);
  });
  std::ostringstream out;
  for (const auto& e : entries) {
    out << e.span.begin << '\t' << e.span.end << '\t' << to_string(e.kind) << '\t' << e.text
        << '\n';
  }
  return out.str();
}

InitialCategory classify_initial(std::string_view pinyin) {
  if (pinyin.empty()) return InitialCategory::Null;
  switch (std::tolower(static_cast<unsigned char>(pinyin.front()))) {
    case 'b': case 'p': case 'd': case 't': case 'g': case 'k':
      return InitialCategory::Stop;
    case 'c': case 'f': case 'h': case 'j': case 'q': case 's': case 'z':
      return InitialCategory::Fricative;
    case 'm': case 'n':
      return InitialCategory::Nasal;
    case 'l': case 'r': case 'w': case 'y':
      return InitialCategory::Glide;
    default:
      return InitialCategory::Null;
  }
}

AsrFrames asr_frames(const std::vector<double>& env, AsrParams params) {
  const std::size_t n = env.size();
  if (n < 3) {
    throw Error(ErrorKind::SpanTooShort, "A-S-R needs at least 3 envelope frames, got " +
                                             std::to_string(n));
  }
  const std::size_t lo = n / 3;
  const std::size_t hi = n - n / 3;
  const double threshold =
      params.threshold_factor *
      detail::median(std::vector<double>(env.begin() + static_cast<std::ptrdiff_t>(lo),
                                         env.begin() + static_cast<std::ptrdiff_t>(hi)));
  const auto cap = static_cast<std::size_t>(std::floor(params.cap_fraction * static_cast<double>(n)));
  AsrFrames out;
  while (out.attack < n && env[out.attack] < threshold) ++out.attack;
  while (out.release < n && env[n - 1 - out.release] < threshold) ++out.release;
  out.attack = std::min(out.attack, cap);
  out.release = std::min(out.release, cap);
  return out;
}

AsrSpans asr_segment(Span vowel, const EnergyCurve& envelope, AsrParams params) {
  const std::int64_t len = vowel.length();
  const std::size_t n = envelope.values.size();
  if (len < envelope.frame_len_samples || n < 3) {
    throw Error(ErrorKind::SpanTooShort,
                "vowel of " + std::to_string(len) + " samples is shorter than 3 envelope frames");
  }
  const auto f = asr_frames(envelope.values, params);
  const std::int64_t hop = envelope.hop_samples;
  // Boundary between frames j-1 and j: midway between their centres.
  const std::int64_t offset = (envelope.frame_len_samples - hop) / 2;
  std::int64_t a_end = f.attack == 0 ? 0 : static_cast<std::int64_t>(f.attack) * hop + offset;
  std::int64_t r_begin =
      f.release == 0 ? len
                     : static_cast<std::int64_t>(n - f.release) * hop + offset;
  const auto cap = static_cast<std::int64_t>(std::floor(params.cap_fraction * static_cast<double>(len)));
  a_end = std::clamp<std::int64_t>(a_end, 0, cap);
  r_begin = std::clamp<std::int64_t>(r_begin, len - cap, len);
  return AsrSpans{{vowel.begin, vowel.begin + a_end},
                  {vowel.begin + a_end, vowel.begin + r_begin},
                  {vowel.begin + r_begin, vowel.end}};
}

std::vector<double> spectral_flux(std::span<const double> samples, int frame_len, int hop) {
  const auto spectra = frame_spectra(samples, frame_len, hop);
  std::vector<double> flux(spectra.size(), 0.0);
  for (std::size_t j = 1; j < spectra.size(); ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < spectra[j].size(); ++k) {
      acc += std::max(0.0, spectra[j][k] - spectra[j - 1][k]);
    }
    flux[j] = acc;
  }
  return flux;
}

std::vector<double> spectral_variance(std::span<const double> samples, int frame_len, int hop) {
  const auto spectra = frame_spectra(samples, frame_len, hop);
  std::vector<double> out;
  out.reserve(spectra.size());
  for (const auto& mag : spectra) {
    double mean = 0.0;
    for (double v : mag) mean += v;
    mean /= static_cast<double>(mag.size());
    double var = 0.0;
    for (double v : mag) var += (v - mean) * (v - mean);
    out.push_back(var / static_cast<double>(mag.size()));
  }
  return out;
}

std::vector<double> zero_crossings(std::span<const double> samples, int frame_len, int hop) {
  const auto grid = grid_over(0, static_cast<std::int64_t>(samples.size()), frame_len, hop);
  std::vector<double> out(grid.count, 0.0);
  for (std::size_t j = 0; j < grid.count; ++j) {
    const auto frame = samples.subspan(j * hop, frame_len);
    int count = 0;
    for (std::size_t t = 1; t < frame.size(); ++t) {
      if ((frame[t - 1] >= 0.0) != (frame[t] >= 0.0)) ++count;
    }
    out[j] = count;
  }
  return out;
}

std::int64_t refine_boundary(const Signal& signal, std::int64_t approx, InitialCategory category,
                             RefineParams params) {
  const auto n = static_cast<std::int64_t>(signal.size());
  const auto w = static_cast<std::int64_t>(std::lround(params.window_s * signal.sample_rate));
  if (approx < 0 || approx >= n || approx - w < 0 || approx + w > n) {
    throw Error(ErrorKind::WindowOutOfBounds,
                "search window around sample " + std::to_string(approx) + " leaves the signal");
  }
  if (category == InitialCategory::Glide || category == InitialCategory::Null) return approx;

  const std::int64_t lo = approx - w;
  const std::int64_t hi = approx + w;
  // Analyse with one frame of context on either side so candidate positions
  // cover the whole window; candidates are then restricted to [lo, hi].
  const std::int64_t ctx_lo = std::max<std::int64_t>(0, lo - kFrameLen);
  const std::int64_t ctx_hi = std::min<std::int64_t>(n, hi + kFrameLen);
  const std::span<const double> region(signal.samples.data() + ctx_lo,
                                       static_cast<std::size_t>(ctx_hi - ctx_lo));
  const auto frame_start = [&](std::size_t j) {
    return ctx_lo + static_cast<std::int64_t>(j) * kHop;
  };
  const auto in_window = [&](std::int64_t p) { return p >= lo && p <= hi; };

  std::int64_t best = approx;
  if (category == InitialCategory::Stop) {
    // Flux at frame j is attributed to the samples it adds over frame j-1.
    const auto flux = spectral_flux(region);
    double best_val = -1.0;
    for (std::size_t j = 1; j < flux.size(); ++j) {
      const std::int64_t p = frame_start(j) + kFrameLen - kHop / 2;
      if (in_window(p) && flux[j] > best_val) {
        best_val = flux[j];
        best = p;
      }
    }
  } else if (category == InitialCategory::Nasal) {
    const auto var = spectral_variance(region);
    double best_val = 0.0;
    bool found = false;
    for (std::size_t j = 0; j < var.size(); ++j) {
      const std::int64_t p = frame_start(j) + kFrameLen / 2;
      if (in_window(p) && (!found || var[j] < best_val)) {
        best_val = var[j];
        best = p;
        found = true;
      }
    }
  } else {
    const auto zcr = zero_crossings(region);
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < zcr.size(); ++j) {
      if (in_window(frame_start(j) + kFrameLen / 2)) idx.push_back(j);
    }
    // midway between the quietest and busiest frame: a window median lands
    // inside the fricative whenever the fricative fills most of the window
    double zmin = 1e300, zmax = -1e300;
    for (auto j : idx) {
      zmin = std::min(zmin, zcr[j]);
      zmax = std::max(zmax, zcr[j]);
    }
    const double threshold = 0.5 * (zmin + zmax);
    std::size_t best_len = 0;
    std::size_t run = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      run = zcr[idx[i]] > threshold ? run + 1 : 0;
      if (run > best_len) {
        best_len = run;
        best = frame_start(idx[i]) + kFrameLen / 2 + kHop / 2;
      }
    }
  }
  return std::clamp(best, lo, hi);
}

std::vector<LabeledSyllable> group_syllables(const SegmentLabels& labels) {
  std::vector<LabeledSyllable> out;
  for (const auto& e : labels.entries) {
    if (e.kind != SegmentKind::Syllable) continue;
    LabeledSyllable s;
    s.span = e.span;
    s.text = e.text;
    s.sliding = !e.text.empty() && e.text.front() == '-';
    out.push_back(std::move(s));
  }
  for (const auto& e : labels.entries) {
    if (e.kind == SegmentKind::Syllable) continue;
    for (auto& s : out) {
      if (!s.span.contains(e.span)) continue;
      switch (e.kind) {
        case SegmentKind::Initial: s.initial = e.span; break;
        case SegmentKind::Attack: s.attack = e.span; break;
        case SegmentKind::Sustain: s.sustain = e.span; break;
        case SegmentKind::Release: s.release = e.span; break;
        case SegmentKind::NasalEnd: s.nasal_end = e.span; break;
        case SegmentKind::Syllable: break;
      }
      break;
    }
  }
  return out;
}

SyllableSegmentation segment_syllable(const Signal& signal, const LabeledSyllable& syl,
                                      InitialCategory category, SegmentOptions options) {
  const std::int64_t base = syl.span.begin;
  const std::int64_t vowel_end = syl.nasal_end ? syl.nasal_end->begin : syl.span.end;
  std::int64_t vowel_begin = syl.initial ? syl.initial->end : base;

  if (syl.initial && options.refine_initial) {
    try {
      const auto refined = refine_boundary(signal, vowel_begin, category, options.refine);
      // Keep the label when refinement would starve either side.
      if (refined > base && vowel_end - refined >= kFrameLen + 2 * kHop) vowel_begin = refined;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::WindowOutOfBounds) throw;
    }
  }

  const Span vowel{vowel_begin, vowel_end};
  Span a, s, r;
  const bool labelled_asr = syl.attack && syl.sustain && syl.release &&
                            syl.attack->end > vowel.begin && syl.release->begin < vowel.end &&
                            syl.attack->end <= syl.release->begin;
  if (labelled_asr) {
    a = {vowel.begin, syl.attack->end};
    s = {syl.attack->end, syl.release->begin};
    r = {syl.release->begin, vowel.end};
  } else {
    const std::span<const double> vs(signal.samples.data() + vowel.begin,
                                     static_cast<std::size_t>(vowel.length()));
    if (vowel.length() < kFrameLen + 2 * kHop) {
      throw Error(ErrorKind::SpanTooShort, "vowel of syllable '" + syl.text + "' spans only " +
                                               std::to_string(vowel.length()) + " samples");
    }
    const auto asr = asr_segment(vowel, max_amp_envelope(vs), options.asr);
    a = asr.a;
    s = asr.s;
    r = asr.r;
  }

  const auto rel = [base](Span sp) { return Span{sp.begin - base, sp.end - base}; };
  SyllableSegmentation seg;
  if (syl.initial) seg.cx = rel(Span{base, vowel.begin});
  seg.a = rel(a);
  seg.s = rel(s);
  seg.r = rel(r);
  if (syl.nasal_end) seg.cn = rel(Span{vowel.end, syl.span.end});
  seg.t_v = static_cast<double>(a.begin) / signal.sample_rate;
  return seg;
}

}  // namespace hnmsing
