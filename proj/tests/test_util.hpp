#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "ctxbias/linalg.hpp"
#include "ctxbias/random.hpp"

namespace ctxbias::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ctxbias_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Vector gaussian_vector(Rng& rng, std::size_t d, double scale = 1.0) {
  Vector v(d);
  for (auto& x : v) x = scale * standard_normal(rng);
  return v;
}

inline std::vector<Vector> gaussian_cloud(Rng& rng, std::size_t n, std::size_t d,
                                          double scale = 1.0) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(gaussian_vector(rng, d, scale));
  return out;
}

}  // namespace ctxbias::testing
