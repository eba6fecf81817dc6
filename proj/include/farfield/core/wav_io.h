#pragma once

#include <filesystem>
#include <vector>

#include "farfield/core/audio.h"

namespace farfield {

enum class WavFormat { kPcm16, kFloat32 };

// Reads PCM (16/24/32-bit) or IEEE float (32/64-bit) RIFF/WAVE files,
// including WAVE_FORMAT_EXTENSIBLE headers. Samples are scaled to [-1, 1).
MultichannelAudio ReadWav(const std::filesystem::path& path);

// Reads one or more files and stacks their channels. All files must share a
// sample rate and length.
MultichannelAudio ReadWavChannels(
    const std::vector<std::filesystem::path>& paths);

// PCM16 output is clipped to the representable range.
void WriteWav(const std::filesystem::path& path, const MultichannelAudio& audio,
              WavFormat format = WavFormat::kFloat32);

}  // namespace farfield
