#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace farfield::pipeline {

std::string Sha256Hex(std::string_view data);
std::string Sha256File(const std::filesystem::path& path);

// Calls `write` on a temporary sibling of `path` and renames it into place.
void AtomicWrite(const std::filesystem::path& path,
                 const std::function<void(const std::filesystem::path&)>& write);
void AtomicWriteText(const std::filesystem::path& path, std::string_view text);
std::string ReadText(const std::filesystem::path& path);

// Content-hash cache of one stage output directory. The key combines the
// stage name, its configuration and the hashes of all inputs.
class StageCache {
 public:
  StageCache(std::filesystem::path dir, std::string key);

  const std::filesystem::path& dir() const { return dir_; }
  const std::string& key() const { return key_; }
  // True when the directory holds a committed result for this key and all
  // listed outputs still exist.
  bool Hit(const std::vector<std::string>& outputs) const;
  // Clears a stale result and creates the directory.
  void Prepare() const;
  void Commit() const;

 private:
  std::filesystem::path dir_;
  std::string key_;
};

// Runs fn(0..n-1) on up to `workers` threads. The exception of the lowest
// failing index is rethrown after all work has finished.
void ParallelFor(int n, int workers, const std::function<void(int)>& fn);

}  // namespace farfield::pipeline
