#include "farfield/core/logging.h"

#include <spdlog/sinks/stdout_color_sinks.h>

namespace farfield {

std::shared_ptr<spdlog::logger> Logger() {
  static const std::shared_ptr<spdlog::logger> logger = [] {
    auto existing = spdlog::get("farfield");
    return existing ? existing : spdlog::stderr_color_mt("farfield");
  }();
  return logger;
}

}  // namespace farfield
