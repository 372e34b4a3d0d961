#include "hnmsing/signal_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "hnmsing/error.hpp"

namespace hnmsing {
namespace {

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

void check_frame_args(std::size_t n, int frame_len, int hop) {
  if (frame_len <= 0 || hop <= 0) {
    throw Error(ErrorKind::FrameLongerThanSignal, "frame length and hop must be positive");
  }
  if (n < static_cast<std::size_t>(frame_len)) {
    throw Error(ErrorKind::FrameLongerThanSignal,
                "frame of " + std::to_string(frame_len) + " samples exceeds signal of " +
                    std::to_string(n));
  }
}

}  // namespace

void require_pipeline_rate(const Signal& signal) {
  if (signal.sample_rate != kSampleRate) {
    throw Error(ErrorKind::UnsupportedRate, "pipeline requires " + std::to_string(kSampleRate) +
                                                " Hz, got " + std::to_string(signal.sample_rate));
  }
}

std::size_t frame_count(std::size_t n, int frame_len, int hop) {
  check_frame_args(n, frame_len, hop);
  return (n - static_cast<std::size_t>(frame_len)) / static_cast<std::size_t>(hop) + 1;
}

Signal decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw Error(ErrorKind::MalformedRiff, "missing RIFF/WAVE header");
  }
  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      throw Error(ErrorKind::MalformedRiff, "chunk extends past end of file");
    }
    if (tag_is(bytes, pos, "fmt ")) {
      if (size < 16) throw Error(ErrorKind::MalformedRiff, "fmt chunk too short");
      const std::uint16_t format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      rate = read_u32(bytes, body + 4);
      bits = read_u16(bytes, body + 14);
      if (format != 1 || bits != 16) {
        throw Error(ErrorKind::UnsupportedFormat,
                    "only 16-bit PCM is supported (format " + std::to_string(format) + ", " +
                        std::to_string(bits) + " bits)");
      }
      if (channels == 0) throw Error(ErrorKind::MalformedRiff, "zero channels");
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (!have_fmt) throw Error(ErrorKind::MalformedRiff, "data chunk before fmt chunk");
      Signal out;
      out.sample_rate = static_cast<int>(rate);
      const std::size_t frames = size / (2u * channels);
      out.samples.resize(frames);
      // Multichannel input is averaged down to mono.
      for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::uint16_t c = 0; c < channels; ++c) {
          const auto raw =
              static_cast<std::int16_t>(read_u16(bytes, body + 2 * (i * channels + c)));
          acc += raw / 32768.0;
        }
        out.samples[i] = acc / channels;
      }
      return out;
    }
    pos = body + size + (size & 1u);
  }
  throw Error(ErrorKind::MalformedRiff, have_fmt ? "missing data chunk" : "missing fmt chunk");
}

Signal read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(const Signal& signal) {
  if (signal.samples.empty()) throw Error(ErrorKind::EmptySignal, "nothing to write");
  for (std::size_t i = 0; i < signal.samples.size(); ++i) {
    const double v = signal.samples[i];
    if (!(std::abs(v) <= 1.0)) {
      throw Error(ErrorKind::AmplitudeOutOfRange,
                  "sample " + std::to_string(i) + " = " + std::to_string(v));
    }
  }
  const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double v : signal.samples) {
    const long q = std::clamp(std::lround(v * 32768.0), -32768L, 32767L);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

void write_wav(const Signal& signal, const std::filesystem::path& path) {
  const auto bytes = encode_wav(signal);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoError, "short write to " + path.string());
}

EnergyCurve max_amp_envelope(std::span<const double> samples, int frame_len, int hop) {
  const std::size_t n = frame_count(samples.size(), frame_len, hop);
  EnergyCurve curve{hop, frame_len, {}, CurveKind::MaxAmplitude};
  curve.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto frame = samples.subspan(i * hop, frame_len);
    double peak = 0.0;
    for (double x : frame) peak = std::max(peak, std::abs(x));
    curve.values[i] = peak;
  }
  return curve;
}

EnergyCurve frame_energy_curve(std::span<const double> samples, int frame_len, int hop) {
  const std::size_t n = frame_count(samples.size(), frame_len, hop);
  EnergyCurve curve{hop, frame_len, {}, CurveKind::FrameEnergy};
  curve.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double e = 0.0;
    for (double x : samples.subspan(i * hop, frame_len)) e += x * x;
    curve.values[i] = e;
  }
  return curve;
}

}  // namespace hnmsing
