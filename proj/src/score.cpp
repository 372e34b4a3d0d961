#include "hnmsing/score.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "hnmsing/error.hpp"

namespace hnmsing {
namespace {

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, ErrorKind on_short)
      : bytes_(bytes), on_short_(on_short) {}

  bool done() const noexcept { return pos_ >= bytes_.size(); }
  std::size_t pos() const noexcept { return pos_; }

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint8_t peek() {
    need(1);
    return bytes_[pos_];
  }
  std::uint16_t u16be() {
    need(2);
    const auto v = static_cast<std::uint16_t>((bytes_[pos_] << 8) | bytes_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32be() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }
  std::uint32_t vlq() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t b = u8();
      v = (v << 7) | (b & 0x7f);
      if ((b & 0x80) == 0) return v;
    }
    throw Error(on_short_, "variable-length quantity longer than 4 bytes");
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool tag_is(const char* tag) const {
    return pos_ + 4 <= bytes_.size() &&
           std::equal(tag, tag + 4, bytes_.begin() + static_cast<std::ptrdiff_t>(pos_));
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error(on_short_, "unexpected end of data");
  }

  std::span<const std::uint8_t> bytes_;
  ErrorKind on_short_;
  std::size_t pos_ = 0;
};

int data_bytes_for(std::uint8_t status) {
  switch (status & 0xf0) {
    case 0xc0:
    case 0xd0:
      return 1;
    default:
      return 2;
  }
}

void parse_track(std::span<const std::uint8_t> body, int melody_channel,
                 std::vector<NoteEvent>& notes, std::vector<TempoChange>& tempos) {
  ByteReader r(body, ErrorKind::TruncatedTrack);
  std::map<int, std::deque<std::int64_t>> open;  // key -> pending onset ticks
  std::int64_t tick = 0;
  std::uint8_t running = 0;
  bool ended = false;
  while (!r.done() && !ended) {
    tick += r.vlq();
    std::uint8_t status = r.peek();
    if (status & 0x80) {
      r.u8();
    } else if (running != 0) {
      status = running;
    } else {
      throw Error(ErrorKind::TruncatedTrack, "data byte without running status");
    }

    if (status == 0xff) {
      const std::uint8_t type = r.u8();
      const std::uint32_t len = r.vlq();
      const auto data = r.take(len);
      if (type == 0x51 && len == 3) {
        tempos.push_back({tick, static_cast<std::uint32_t>((data[0] << 16) | (data[1] << 8) |
                                                           data[2])});
      } else if (type == 0x2f) {
        ended = true;
      }
      continue;
    }
    if (status == 0xf0 || status == 0xf7) {
      r.take(r.vlq());
      continue;
    }
    if (status >= 0xf0) {
      throw Error(ErrorKind::TruncatedTrack, "unexpected system message in track");
    }

    running = status;
    const std::uint8_t d1 = r.u8();
    const std::uint8_t d2 = data_bytes_for(status) == 2 ? r.u8() : 0;
    const int channel = status & 0x0f;
    const int kind = status & 0xf0;
    if (channel != melody_channel) continue;
    const bool note_on = kind == 0x90 && d2 > 0;
    const bool note_off = kind == 0x80 || (kind == 0x90 && d2 == 0);
    if (note_on) {
      open[d1].push_back(tick);
    } else if (note_off) {
      auto it = open.find(d1);
      if (it == open.end() || it->second.empty()) continue;
      const std::int64_t onset = it->second.front();
      it->second.pop_front();
      if (tick > onset) notes.push_back({d1, onset, tick, channel});
    }
  }
  for (const auto& [key, pending] : open) {
    if (!pending.empty()) {
      throw Error(ErrorKind::UnmatchedNoteOn, "note-on for key " + std::to_string(key) +
                                                  " at tick " + std::to_string(pending.front()) +
                                                  " has no note-off");
    }
  }
}

}  // namespace

TempoMap::TempoMap(int ticks_per_quarter, std::vector<TempoChange> changes)
    : tpq_(ticks_per_quarter), changes_(std::move(changes)) {
  std::stable_sort(changes_.begin(), changes_.end(),
                   [](const TempoChange& a, const TempoChange& b) { return a.tick < b.tick; });
  // A later change at the same tick overrides an earlier one.
  std::vector<TempoChange> dedup;
  for (const auto& c : changes_) {
    if (!dedup.empty() && dedup.back().tick == c.tick) {
      dedup.back() = c;
    } else {
      dedup.push_back(c);
    }
  }
  changes_ = std::move(dedup);
  if (changes_.empty() || changes_.front().tick != 0) {
    changes_.insert(changes_.begin(), TempoChange{0, 500000});
  }
}

double TempoMap::seconds_at(std::int64_t tick) const {
  double seconds = 0.0;
  for (std::size_t i = 0; i < changes_.size(); ++i) {
    const std::int64_t start = changes_[i].tick;
    if (tick <= start) break;
    const std::int64_t end =
        i + 1 < changes_.size() ? std::min(tick, changes_[i + 1].tick) : tick;
    seconds += static_cast<double>(end - start) * changes_[i].us_per_quarter / 1e6 / tpq_;
  }
  return seconds;
}

SmfScore parse_smf(std::span<const std::uint8_t> bytes, int melody_channel) {
  ByteReader r(bytes, ErrorKind::MalformedHeader);
  if (!r.tag_is("MThd")) throw Error(ErrorKind::MalformedHeader, "missing MThd");
  r.take(4);
  const std::uint32_t header_len = r.u32be();
  if (header_len < 6) throw Error(ErrorKind::MalformedHeader, "MThd shorter than 6 bytes");
  const auto header = r.take(header_len);
  const int format = (header[0] << 8) | header[1];
  const int ntracks = (header[2] << 8) | header[3];
  const int division = (header[4] << 8) | header[5];
  if (format == 2) throw Error(ErrorKind::UnsupportedSmfFormat, "SMF format 2");
  if (format > 2) {
    throw Error(ErrorKind::MalformedHeader, "unknown SMF format " + std::to_string(format));
  }
  if (division & 0x8000) {
    throw Error(ErrorKind::UnsupportedSmfFormat, "SMPTE time division");
  }
  if (division == 0) throw Error(ErrorKind::MalformedHeader, "zero ticks per quarter");

  std::vector<NoteEvent> notes;
  std::vector<TempoChange> tempos;
  int seen = 0;
  ByteReader chunks(bytes.subspan(r.pos()), ErrorKind::TruncatedTrack);
  while (seen < ntracks) {
    if (chunks.done()) {
      throw Error(ErrorKind::TruncatedTrack, "expected " + std::to_string(ntracks) +
                                                 " tracks, found " + std::to_string(seen));
    }
    const bool is_track = chunks.tag_is("MTrk");
    chunks.take(4);
    const std::uint32_t len = chunks.u32be();
    const auto body = chunks.take(len);
    if (!is_track) continue;
    parse_track(body, melody_channel, notes, tempos);
    ++seen;
  }

  std::sort(notes.begin(), notes.end(), [](const NoteEvent& a, const NoteEvent& b) {
    return a.onset_tick != b.onset_tick ? a.onset_tick < b.onset_tick : a.key < b.key;
  });
  return SmfScore{TempoMap(division, std::move(tempos)), std::move(notes)};
}

SmfScore read_smf(const std::string& path, int melody_channel) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_smf(bytes, melody_channel);
}

std::vector<MergedNote> merge_portamento(std::span<const NoteEvent> notes,
                                         const TempoMap& tempo) {
  for (std::size_t i = 1; i < notes.size(); ++i) {
    const auto& a = notes[i - 1];
    const auto& b = notes[i];
    if (b.onset_tick < a.onset_tick || (b.onset_tick == a.onset_tick && b.key < a.key)) {
      throw Error(ErrorKind::UnsortedInput, "note " + std::to_string(i) + " out of order");
    }
  }
  std::vector<MergedNote> out;
  std::int64_t group_end = 0;
  for (const auto& n : notes) {
    const SubNote sub{n.key, tempo.seconds_at(n.onset_tick), tempo.seconds_at(n.offset_tick)};
    if (!out.empty() && n.onset_tick < group_end) {
      auto& g = out.back();
      g.sub_notes.push_back(sub);
      g.portamento = true;
      group_end = std::max(group_end, n.offset_tick);
      g.t_off = tempo.seconds_at(group_end);
    } else {
      out.push_back(MergedNote{{sub}, sub.onset_s, sub.offset_s, false});
      group_end = n.offset_tick;
    }
  }
  return out;
}

std::vector<ScoredSyllable> attach_lyrics(std::span<const MergedNote> merged,
                                          std::span<const std::string> syllables) {
  if (merged.size() != syllables.size()) {
    throw Error(ErrorKind::CountMismatch, std::to_string(merged.size()) + " notes vs " +
                                              std::to_string(syllables.size()) + " syllables");
  }
  std::vector<ScoredSyllable> out;
  out.reserve(merged.size());
  for (std::size_t i = 0; i < merged.size(); ++i) out.push_back({syllables[i], merged[i]});
  return out;
}

std::vector<std::string> parse_lyrics(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream words(line);
    std::string w;
    while (words >> w) out.push_back(w);
  }
  return out;
}

double key_to_hz(int key) {
  if (key < 0 || key > 127) {
    throw Error(ErrorKind::KeyOutOfRange, "MIDI key " + std::to_string(key));
  }
  return 440.0 * std::pow(2.0, (key - 69) / 12.0);
}

std::vector<std::uint8_t> write_smf_format0(int ticks_per_quarter, std::uint32_t us_per_quarter,
                                            std::span<const SmfNote> notes) {
  struct Ev {
    std::int64_t tick;
    int order;  // note-offs before note-ons at equal ticks
    std::uint8_t status, d1, d2;
  };
  std::vector<Ev> evs;
  for (const auto& n : notes) {
    const auto ch = static_cast<std::uint8_t>(n.channel & 0x0f);
    evs.push_back({n.on_tick, 1, static_cast<std::uint8_t>(0x90 | ch),
                   static_cast<std::uint8_t>(n.key), static_cast<std::uint8_t>(n.velocity)});
    evs.push_back({n.off_tick, 0, static_cast<std::uint8_t>(0x80 | ch),
                   static_cast<std::uint8_t>(n.key), 0});
  }
  std::stable_sort(evs.begin(), evs.end(), [](const Ev& a, const Ev& b) {
    return a.tick != b.tick ? a.tick < b.tick : a.order < b.order;
  });

  std::vector<std::uint8_t> track;
  auto put_vlq = [&track](std::uint32_t v) {
    std::uint8_t buf[4];
    int n = 0;
    buf[n++] = v & 0x7f;
    while (v >>= 7) buf[n++] = static_cast<std::uint8_t>((v & 0x7f) | 0x80);
    while (n) track.push_back(buf[--n]);
  };
  put_vlq(0);
  track.insert(track.end(), {0xff, 0x51, 0x03, static_cast<std::uint8_t>(us_per_quarter >> 16),
                             static_cast<std::uint8_t>(us_per_quarter >> 8),
                             static_cast<std::uint8_t>(us_per_quarter)});
  std::int64_t last = 0;
  for (const auto& e : evs) {
    put_vlq(static_cast<std::uint32_t>(e.tick - last));
    last = e.tick;
    track.insert(track.end(), {e.status, e.d1, e.d2});
  }
  put_vlq(0);
  track.insert(track.end(), {0xff, 0x2f, 0x00});

  std::vector<std::uint8_t> out{'M', 'T', 'h', 'd', 0, 0, 0, 6, 0, 0, 0, 1};
  out.push_back(static_cast<std::uint8_t>(ticks_per_quarter >> 8));
  out.push_back(static_cast<std::uint8_t>(ticks_per_quarter));
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  const auto len = static_cast<std::uint32_t>(track.size());
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(len >> s));
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

}  // namespace hnmsing
