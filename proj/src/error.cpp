#include "hnmsing/error.hpp"

namespace hnmsing {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::MalformedRiff: return "MalformedRiff";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::UnsupportedRate: return "UnsupportedRate";
    case ErrorKind::EmptySignal: return "EmptySignal";
    case ErrorKind::AmplitudeOutOfRange: return "AmplitudeOutOfRange";
    case ErrorKind::FrameLongerThanSignal: return "FrameLongerThanSignal";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::TruncatedTrack: return "TruncatedTrack";
    case ErrorKind::UnmatchedNoteOn: return "UnmatchedNoteOn";
    case ErrorKind::UnsupportedSmfFormat: return "UnsupportedSmfFormat";
    case ErrorKind::UnsortedInput: return "UnsortedInput";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::KeyOutOfRange: return "KeyOutOfRange";
    case ErrorKind::BadFrameLength: return "BadFrameLength";
    case ErrorKind::NonPositiveInput: return "NonPositiveInput";
    case ErrorKind::BadLine: return "BadLine";
    case ErrorKind::OverlappingSyllables: return "OverlappingSyllables";
    case ErrorKind::OrphanSubSegment: return "OrphanSubSegment";
    case ErrorKind::SpanTooShort: return "SpanTooShort";
    case ErrorKind::WindowOutOfBounds: return "WindowOutOfBounds";
    case ErrorKind::F0OutOfRange: return "F0OutOfRange";
    case ErrorKind::EmptyGrid: return "EmptyGrid";
    case ErrorKind::FreqOutOfRange: return "FreqOutOfRange";
    case ErrorKind::EmptyFrames: return "EmptyFrames";
    case ErrorKind::NonuniformSpacing: return "NonuniformSpacing";
    case ErrorKind::SpanOutOfBounds: return "SpanOutOfBounds";
    case ErrorKind::LabelScoreMismatch: return "LabelScoreMismatch";
    case ErrorKind::UnlabeledSyllable: return "UnlabeledSyllable";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::UnknownVersion: return "UnknownVersion";
    case ErrorKind::NonPositiveTargetDuration: return "NonPositiveTargetDuration";
    case ErrorKind::SegmentSetMismatch: return "SegmentSetMismatch";
    case ErrorKind::OutOfSpan: return "OutOfSpan";
    case ErrorKind::UnvoicedFrame: return "UnvoicedFrame";
    case ErrorKind::TargetF0OutOfRange: return "TargetF0OutOfRange";
    case ErrorKind::RetuneCollapse: return "RetuneCollapse";
    case ErrorKind::LyricMismatch: return "LyricMismatch";
    case ErrorKind::AlignmentMismatch: return "AlignmentMismatch";
    case ErrorKind::NonMonotoneOnsets: return "NonMonotoneOnsets";
    case ErrorKind::MissingUnit: return "MissingUnit";
    case ErrorKind::Usage: return "Usage";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Usage:
      return 1;
    case ErrorKind::IoError:
    case ErrorKind::MalformedRiff:
    case ErrorKind::UnsupportedFormat:
    case ErrorKind::MalformedHeader:
    case ErrorKind::TruncatedTrack:
    case ErrorKind::UnmatchedNoteOn:
    case ErrorKind::UnsupportedSmfFormat:
    case ErrorKind::BadLine:
    case ErrorKind::OverlappingSyllables:
    case ErrorKind::OrphanSubSegment:
    case ErrorKind::SchemaViolation:
    case ErrorKind::UnknownVersion:
      return 2;
    default:
      return 3;
  }
}

}  // namespace hnmsing
