#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mb {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

// 8-bit RGB PNG filled with one colour.
std::string encode_png_solid(int width, int height, Rgb colour);

struct PngInfo {
  int width = 0;
  int height = 0;
};
// Reads the IHDR chunk; throws validation_error on anything that is not a PNG.
PngInfo read_png_info(std::string_view bytes);

struct PcmAudio {
  int sample_rate_hz = 0;
  // First channel, scaled to [-1, 1).
  std::vector<double> samples;
};

// Mono 16-bit PCM WAV. Samples are clamped to [-1, 1].
std::string encode_wav_mono16(const std::vector<double>& samples, int sample_rate_hz);
PcmAudio decode_wav(std::string_view bytes);

}  // namespace mb
