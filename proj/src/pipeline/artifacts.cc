#include "farfield/pipeline/artifacts.h"

#include <atomic>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "farfield/core/errors.h"

namespace farfield::pipeline {
namespace {

namespace fs = std::filesystem;

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("SHA-256 init failed");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void Update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }

  std::string Hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, digest, &len);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) {
      os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return os.str();
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string Sha256Hex(std::string_view data) {
  Sha256 h;
  h.Update(data.data(), data.size());
  return h.Hex();
}

std::string Sha256File(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  Sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.Update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.Hex();
}

void AtomicWrite(const fs::path& path, const std::function<void(const fs::path&)>& write) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ostringstream suffix;
  suffix << ".tmp." << std::this_thread::get_id();
  fs::path tmp = path;
  tmp += suffix.str();
  try {
    write(tmp);
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

void AtomicWriteText(const fs::path& path, std::string_view text) {
  AtomicWrite(path, [&](const fs::path& tmp) {
    std::ofstream out(tmp, std::ios::binary);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DataError("cannot write " + tmp.string());
  });
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

StageCache::StageCache(fs::path dir, std::string key)
    : dir_(std::move(dir)), key_(std::move(key)) {}

bool StageCache::Hit(const std::vector<std::string>& outputs) const {
  const fs::path stamp = dir_ / ".cache_key";
  if (!fs::exists(stamp) || ReadText(stamp) != key_) return false;
  for (const auto& name : outputs) {
    if (!fs::exists(dir_ / name)) return false;
  }
  return true;
}

void StageCache::Prepare() const {
  std::error_code ec;
  fs::remove(dir_ / ".cache_key", ec);
  fs::create_directories(dir_);
}

void StageCache::Commit() const { AtomicWriteText(dir_ / ".cache_key", key_); }

void ParallelFor(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto run = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(workers, 1, n);
  if (threads == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(run);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace farfield::pipeline
