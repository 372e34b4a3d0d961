#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hnmsing {

struct TempoChange {
  std::int64_t tick = 0;
  std::uint32_t us_per_quarter = 500000;
};

// Sorted tempo changes; the first change always sits at tick 0.
class TempoMap {
 public:
  TempoMap() = default;
  TempoMap(int ticks_per_quarter, std::vector<TempoChange> changes);

  int ticks_per_quarter() const noexcept { return tpq_; }
  const std::vector<TempoChange>& changes() const noexcept { return changes_; }

  double seconds_at(std::int64_t tick) const;

 private:
  int tpq_ = 480;
  std::vector<TempoChange> changes_{TempoChange{}};
};

struct NoteEvent {
  int key = 60;
  std::int64_t onset_tick = 0;
  std::int64_t offset_tick = 0;
  int channel = 0;

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

struct SubNote {
  int key = 60;
  double onset_s = 0.0;
  double offset_s = 0.0;

  friend bool operator==(const SubNote&, const SubNote&) = default;
};

// One musical note after portamento merging.
struct MergedNote {
  std::vector<SubNote> sub_notes;
  double t_on = 0.0;
  double t_off = 0.0;
  bool portamento = false;

  friend bool operator==(const MergedNote&, const MergedNote&) = default;
};

struct ScoredSyllable {
  std::string lyric;
  MergedNote note;
};

struct SmfScore {
  TempoMap tempo;
  std::vector<NoteEvent> notes;  // sorted by (onset_tick, key)
};

SmfScore parse_smf(std::span<const std::uint8_t> bytes, int melody_channel = 0);
SmfScore read_smf(const std::string& path, int melody_channel = 0);

// Groups notes whose onset precedes the running offset of the current group.
std::vector<MergedNote> merge_portamento(std::span<const NoteEvent> notes, const TempoMap& tempo);

std::vector<ScoredSyllable> attach_lyrics(std::span<const MergedNote> merged,
                                          std::span<const std::string> syllables);

// Whitespace-separated syllables; lines starting with '#' are comments.
std::vector<std::string> parse_lyrics(std::string_view text);

double key_to_hz(int key);

// Minimal SMF writer, used for fixtures and the synthetic demo score.
struct SmfNote {
  int key = 60;
  std::int64_t on_tick = 0;
  std::int64_t off_tick = 0;
  int channel = 0;
  int velocity = 100;
};
std::vector<std::uint8_t> write_smf_format0(int ticks_per_quarter, std::uint32_t us_per_quarter,
                                            std::span<const SmfNote> notes);

}  // namespace hnmsing
