#include "vowelprompt/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "vowelprompt/error.hpp"

namespace vowelprompt {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

}  // namespace

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0)
    throw FormatError("RIFF chunk: missing RIFF signature");
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("RIFF chunk: form type is not WAVE");

  FmtChunk fmt;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    std::string id(reinterpret_cast<const char*>(bytes.data() + pos), 4);
    std::size_t size = read_u32(bytes, pos + 4);
    std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Tolerate a truncated trailing data chunk (common with streamed writers).
      if (id == "data") size = bytes.size() - body;
      else throw FormatError(id + " chunk: declared size exceeds file length");
    }
    if (id == "fmt ") {
      if (size < 16) throw FormatError("fmt chunk: too short");
      fmt.format = read_u16(bytes, body);
      fmt.channels = read_u16(bytes, body + 2);
      fmt.sample_rate = read_u32(bytes, body + 4);
      fmt.bits = read_u16(bytes, body + 14);
      if (fmt.format == kFormatExtensible) {
        if (size < 40) throw FormatError("fmt chunk: truncated WAVE_FORMAT_EXTENSIBLE");
        fmt.format = read_u16(bytes, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data = bytes.subspan(body, size);
      have_data = true;
    }
    pos = body + size + (size & 1);
  }

  if (!have_fmt) throw FormatError("fmt chunk: missing");
  if (!have_data) throw FormatError("data chunk: missing");
  if (fmt.channels != 1 && fmt.channels != 2)
    throw FormatError("fmt chunk: unsupported channel count " + std::to_string(fmt.channels));
  if (fmt.sample_rate == 0) throw FormatError("fmt chunk: sample rate is zero");

  const bool pcm16 = fmt.format == kFormatPcm && fmt.bits == 16;
  const bool f32 = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!pcm16 && !f32)
    throw FormatError("fmt chunk: unsupported encoding (format tag " + std::to_string(fmt.format) +
                      ", " + std::to_string(fmt.bits) + " bits); only PCM16 and float32 are read");

  const std::size_t sample_bytes = pcm16 ? 2 : 4;
  const std::size_t frame_bytes = sample_bytes * fmt.channels;
  const std::size_t frames = data.size() / frame_bytes;
  if (frames == 0) throw FormatError("data chunk: no samples");

  AudioBuffer out;
  out.sample_rate = static_cast<int>(fmt.sample_rate);
  out.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      const std::size_t off = f * frame_bytes + c * sample_bytes;
      double v;
      if (pcm16) {
        v = static_cast<std::int16_t>(read_u16(data, off)) / 32768.0;
      } else {
        v = static_cast<double>(std::bit_cast<float>(read_u32(data, off)));
        if (!std::isfinite(v)) throw FormatError("data chunk: non-finite float sample");
      }
      acc += v;
    }
    out.samples[f] = acc / fmt.channels;
  }
  return out;
}

AudioBuffer load_audio(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open audio file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(std::span<const double> interleaved, int sample_rate,
                                     int channels, WavEncoding encoding) {
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
  const auto data_size = static_cast<std::uint32_t>(interleaved.size() * (bits / 8));

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, static_cast<std::uint16_t>(channels));
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * block);
  put_u16(out, block);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);
  for (double v : interleaved) {
    if (encoding == WavEncoding::kPcm16) {
      const double scaled = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    } else {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, std::span<const double> interleaved,
               int sample_rate, int channels, WavEncoding encoding) {
  const auto bytes = encode_wav(interleaved, sample_rate, channels, encoding);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write audio file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace vowelprompt
