#include "farfield/core/wav_io.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "farfield/core/errors.h"

namespace farfield {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t ReadU32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
         std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}
std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void PutU32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void PutU16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>(v >> 8));
}

double DecodeSample(const unsigned char* p, std::uint16_t format, int bits) {
  if (format == kFormatFloat) {
    if (bits == 32) {
      float v;
      std::memcpy(&v, p, 4);
      return v;
    }
    double v;
    std::memcpy(&v, p, 8);
    return v;
  }
  switch (bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(ReadU16(p)) / 32768.0;
    case 24: {
      std::int32_t v = p[0] | p[1] << 8 | p[2] << 16;
      if (v & 0x800000) v |= ~0xFFFFFF;
      return v / 8388608.0;
    }
    default:
      return static_cast<std::int32_t>(ReadU32(p)) / 2147483648.0;
  }
}

}  // namespace

MultichannelAudio ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12 || std::memcmp(data, "RIFF", 4) != 0 ||
      std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw DataError("not a RIFF/WAVE file: " + path.string());
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* payload = nullptr;
  std::size_t payload_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = data + pos;
    const std::uint32_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0 && avail >= 16) {
      format = ReadU16(data + body);
      channels = ReadU16(data + body + 2);
      rate = ReadU32(data + body + 4);
      bits = ReadU16(data + body + 14);
      if (format == kFormatExtensible && avail >= 26) {
        format = ReadU16(data + body + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      payload = data + body;
      payload_size = avail;
    }
    pos = body + size + (size & 1);
  }
  if (channels == 0 || rate == 0 || payload == nullptr) {
    throw DataError("WAV file lacks fmt or data chunk: " + path.string());
  }
  const bool pcm_ok = format == kFormatPcm &&
                      (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  const bool float_ok = format == kFormatFloat && (bits == 32 || bits == 64);
  if (!pcm_ok && !float_ok) {
    throw DataError("unsupported WAV encoding (format " +
                    std::to_string(format) + ", " + std::to_string(bits) +
                    " bits): " + path.string());
  }
  const std::size_t width = bits / 8;
  const std::size_t frame_bytes = width * channels;
  const Eigen::Index frames = static_cast<Eigen::Index>(payload_size / frame_bytes);
  MultichannelAudio audio = MultichannelAudio::Zeros(channels, frames,
                                                     static_cast<int>(rate));
  for (Eigen::Index t = 0; t < frames; ++t) {
    const unsigned char* p = payload + t * frame_bytes;
    for (int c = 0; c < channels; ++c) {
      audio.samples(c, t) = DecodeSample(p + c * width, format, bits);
    }
  }
  return audio;
}

MultichannelAudio ReadWavChannels(
    const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) throw DataError("no WAV files given");
  std::vector<MultichannelAudio> parts;
  int total = 0;
  for (const auto& p : paths) {
    parts.push_back(ReadWav(p));
    const auto& a = parts.back();
    if (a.sample_rate != parts.front().sample_rate) {
      throw DataError("sample rate mismatch in " + p.string());
    }
    if (a.length() != parts.front().length()) {
      throw DataError("channel length mismatch in " + p.string());
    }
    total += a.channels();
  }
  MultichannelAudio out = MultichannelAudio::Zeros(
      total, parts.front().length(), parts.front().sample_rate);
  int row = 0;
  for (const auto& a : parts) {
    out.samples.middleRows(row, a.channels()) = a.samples;
    row += a.channels();
  }
  return out;
}

void WriteWav(const std::filesystem::path& path, const MultichannelAudio& audio,
              WavFormat format) {
  const std::uint16_t channels = static_cast<std::uint16_t>(audio.channels());
  const std::uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const std::uint32_t block = channels * (bits / 8);
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(audio.length()) * block;

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  PutU32(out, 36 + data_size);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, format == WavFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  PutU16(out, channels);
  PutU32(out, static_cast<std::uint32_t>(audio.sample_rate));
  PutU32(out, static_cast<std::uint32_t>(audio.sample_rate) * block);
  PutU16(out, static_cast<std::uint16_t>(block));
  PutU16(out, bits);
  out += "data";
  PutU32(out, data_size);
  for (Eigen::Index t = 0; t < audio.length(); ++t) {
    for (int c = 0; c < channels; ++c) {
      const double v = audio.samples(c, t);
      if (format == WavFormat::kPcm16) {
        const double scaled = std::round(std::clamp(v, -1.0, 1.0) * 32768.0);
        PutU16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(
                        std::clamp(scaled, -32768.0, 32767.0))));
      } else {
        const float f = static_cast<float>(v);
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        PutU32(out, u);
      }
    }
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write WAV file: " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw DataError("failed writing WAV file: " + path.string());
}

}  // namespace farfield
