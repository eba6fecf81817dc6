#pragma once

#include <memory>

#include <spdlog/spdlog.h>

namespace farfield {

// Library-wide logger ("farfield"), writing to stderr.
std::shared_ptr<spdlog::logger> Logger();

}  // namespace farfield
