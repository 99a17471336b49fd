#include "modbridge/util/media.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <zlib.h>

#include "modbridge/error.hpp"

namespace mb {

namespace {

void put_be32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

void put_le(std::string& out, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_be32(std::string_view s, std::size_t at) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<std::uint8_t>(s[at + i]);
  return v;
}

std::uint32_t get_le(std::string_view s, std::size_t at, int bytes) {
  std::uint32_t v = 0;
  for (int i = bytes - 1; i >= 0; --i)
    v = (v << 8) | static_cast<std::uint8_t>(s[at + static_cast<std::size_t>(i)]);
  return v;
}

void put_chunk(std::string& out, const char* type, std::string_view data) {
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  std::string body(type, 4);
  body.append(data);
  out.append(body);
  put_be32(out, static_cast<std::uint32_t>(
                    crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()))));
}

constexpr char kPngSignature[] = "\x89PNG\r\n\x1a\n";

}  // namespace

std::string encode_png_solid(int width, int height, Rgb colour) {
  require(width > 0 && height > 0, "PNG dimensions must be positive");
  const std::size_t row = 1 + 3 * static_cast<std::size_t>(width);
  std::string raw(row * static_cast<std::size_t>(height), '\0');
  for (std::size_t y = 0; y < static_cast<std::size_t>(height); ++y) {
    char* p = raw.data() + y * row;
    *p++ = 0;  // filter: none
    for (int x = 0; x < width; ++x) {
      *p++ = static_cast<char>(colour.r);
      *p++ = static_cast<char>(colour.g);
      *p++ = static_cast<char>(colour.b);
    }
  }
  uLongf packed_len = compressBound(static_cast<uLong>(raw.size()));
  std::string packed(packed_len, '\0');
  if (compress2(reinterpret_cast<Bytef*>(packed.data()), &packed_len,
                reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                Z_BEST_SPEED) != Z_OK)
    fail(ErrorCode::invariant_violation, "zlib compression failed");
  packed.resize(packed_len);

  std::string out(kPngSignature, 8);
  std::string ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(width));
  put_be32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.append({8, 2, 0, 0, 0});  // depth 8, truecolour, deflate, no filter, no interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", packed);
  put_chunk(out, "IEND", {});
  return out;
}

PngInfo read_png_info(std::string_view bytes) {
  if (bytes.size() < 24 || bytes.substr(0, 8) != std::string_view(kPngSignature, 8) ||
      bytes.substr(12, 4) != "IHDR")
    fail(ErrorCode::validation_error, "not a PNG image");
  return PngInfo{static_cast<int>(get_be32(bytes, 16)), static_cast<int>(get_be32(bytes, 20))};
}

std::string encode_wav_mono16(const std::vector<double>& samples, int sample_rate_hz) {
  require(sample_rate_hz > 0, "sample rate must be positive");
  const auto data_len = static_cast<std::uint32_t>(samples.size() * 2);
  std::string out;
  out.reserve(44 + data_len);
  out.append("RIFF");
  put_le(out, 36 + data_len, 4);
  out.append("WAVEfmt ");
  put_le(out, 16, 4);
  put_le(out, 1, 2);  // PCM
  put_le(out, 1, 2);  // mono
  put_le(out, static_cast<std::uint32_t>(sample_rate_hz), 4);
  put_le(out, static_cast<std::uint32_t>(sample_rate_hz) * 2, 4);
  put_le(out, 2, 2);
  put_le(out, 16, 2);
  out.append("data");
  put_le(out, data_len, 4);
  for (double s : samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(std::lround(c * 32767.0));
    put_le(out, static_cast<std::uint16_t>(v), 2);
  }
  return out;
}

PcmAudio decode_wav(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE")
    fail(ErrorCode::validation_error, "not a RIFF/WAVE file");
  int channels = 0, bits = 0, rate = 0, format = 0;
  std::size_t at = 12;
  while (at + 8 <= bytes.size()) {
    const auto id = bytes.substr(at, 4);
    const std::size_t len = get_le(bytes, at + 4, 4);
    const std::size_t body = at + 8;
    if (body + len > bytes.size()) fail(ErrorCode::validation_error, "truncated WAV chunk");
    if (id == "fmt ") {
      if (len < 16) fail(ErrorCode::validation_error, "short fmt chunk");
      format = static_cast<int>(get_le(bytes, body, 2));
      channels = static_cast<int>(get_le(bytes, body + 2, 2));
      rate = static_cast<int>(get_le(bytes, body + 4, 4));
      bits = static_cast<int>(get_le(bytes, body + 14, 2));
    } else if (id == "data") {
      if (format != 1 || bits != 16 || channels < 1)
        fail(ErrorCode::validation_error, "only 16-bit PCM WAV is supported");
      PcmAudio audio;
      audio.sample_rate_hz = rate;
      const std::size_t frame = 2 * static_cast<std::size_t>(channels);
      audio.samples.reserve(len / frame);
      for (std::size_t p = body; p + frame <= body + len; p += frame) {
        const auto v = static_cast<std::int16_t>(get_le(bytes, p, 2));
        audio.samples.push_back(v / 32768.0);
      }
      return audio;
    }
    at = body + len + (len & 1);
  }
  fail(ErrorCode::validation_error, "WAV has no data chunk");
}

}  // namespace mb
