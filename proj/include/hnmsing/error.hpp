#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hnmsing {

// Every failure the library can raise. The CLI maps each kind onto exactly
// one process exit code (see exit_code()).
enum class ErrorKind {
  // signal_io
  IoError,
  MalformedRiff,
  UnsupportedFormat,
  UnsupportedRate,
  EmptySignal,
  AmplitudeOutOfRange,
  FrameLongerThanSignal,
  // score_model
  MalformedHeader,
  TruncatedTrack,
  UnmatchedNoteOn,
  UnsupportedSmfFormat,
  UnsortedInput,
  CountMismatch,
  KeyOutOfRange,
  // pitch_analysis
  BadFrameLength,
  NonPositiveInput,
  // segmentation
  BadLine,
  OverlappingSyllables,
  OrphanSubSegment,
  SpanTooShort,
  WindowOutOfBounds,
  // hnm_core
  F0OutOfRange,
  EmptyGrid,
  FreqOutOfRange,
  EmptyFrames,
  NonuniformSpacing,
  SpanOutOfBounds,
  // expression
  LabelScoreMismatch,
  UnlabeledSyllable,
  SchemaViolation,
  UnknownVersion,
  // synth_engine
  NonPositiveTargetDuration,
  SegmentSetMismatch,
  OutOfSpan,
  UnvoicedFrame,
  TargetF0OutOfRange,
  RetuneCollapse,
  LyricMismatch,
  AlignmentMismatch,
  NonMonotoneOnsets,
  // corpus
  MissingUnit,
  // cli
  Usage,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// 1 usage, 2 input format, 3 pipeline.
int exit_code(ErrorKind kind) noexcept;

}  // namespace hnmsing
