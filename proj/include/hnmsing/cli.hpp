#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hnmsing/signal_io.hpp"
#include "hnmsing/synth.hpp"

namespace hnmsing {

enum class Command {
  ScoreDump,
  AnalyzeCorpus,
  ExtractExpression,
  Synthesize,
  Resynth,
  DumpCurves,
  MakeSynthetic,
};

struct RunPlan {
  Command command = Command::ScoreDump;
  std::filesystem::path score, lyrics, corpus, expression, audio, labels, manifest, out;
  std::filesystem::path pitch_csv, energy_csv, controls_csv;
  int melody_channel = 0;
  SynthMode mode = SynthMode::Plain;
  int transpose = 0;
  std::uint64_t seed = 0;
  int jobs = 1;
  int hop = kHop;
  std::optional<int> key;
  PlanMode plan = PlanMode::AbsorbInSustain;
  double crossfade_ratio = 0.10;
  double crossfade_cap_ms = 50.0;
  double fricative_overlap_ms = 20.0;
  int cepstral_order = 20;
  double asr_threshold = 0.8;
};

// Arguments exclude the program name. Throws Error(Usage) naming the offending flag.
RunPlan parse_args(const std::vector<std::string>& args);

// Runs the plan and returns the process exit code; diagnostics go to err.
int execute(const RunPlan& plan, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hnmsing
