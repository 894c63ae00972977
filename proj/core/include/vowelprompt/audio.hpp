#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vowelprompt {

/// Mono signal in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

/// Decodes a RIFF/WAVE byte stream. PCM16 and IEEE float32, 1 or 2 channels.
/// Stereo is averaged to mono; PCM16 is scaled by 1/32768.
/// Throws FormatError naming the offending chunk.
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);

/// Reads and decodes a WAV file. Throws IoError if the file cannot be read.
AudioBuffer load_audio(const std::filesystem::path& path);

enum class WavEncoding { kPcm16, kFloat32 };

/// Encodes interleaved samples (channels * frames values) as a WAV file.
std::vector<std::uint8_t> encode_wav(std::span<const double> interleaved, int sample_rate,
                                     int channels, WavEncoding encoding);

void write_wav(const std::filesystem::path& path, std::span<const double> interleaved,
               int sample_rate, int channels = 1, WavEncoding encoding = WavEncoding::kPcm16);

}  // namespace vowelprompt
