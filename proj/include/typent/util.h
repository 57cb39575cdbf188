// Copyright 2026 The typent Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TYPENT_UTIL_H_
#define TYPENT_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace typent {

// 64-bit FNV-1a. Used for cache keys and random substream derivation, so the
// constants must never change.
constexpr uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
constexpr uint64_t kFnvPrime = 1099511628211ULL;

constexpr uint64_t fnv1a64(std::string_view data,
                           uint64_t hash = kFnvOffsetBasis) {
  for (unsigned char c : data) {
    hash ^= c;
    hash *= kFnvPrime;
  }
  return hash;
}

// Seeded random source. Draws are defined in terms of the raw mt19937_64
// output stream, so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Independent stream derived from a root seed and a name, e.g.
  // Rng::substream(seed, "shuffle").
  static Rng substream(uint64_t seed, std::string_view name);

  // Uniform integer in [0, n). n must be positive.
  uint64_t uniform_index(uint64_t n);

  // Uniform double in [0, 1).
  double uniform01();

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T> &items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::vector<std::string> split_whitespace(std::string_view text);
std::string join(const std::vector<std::string> &parts, std::string_view sep);
std::string trim(std::string_view text);
std::string to_lower_ascii(std::string_view text);

// Reads a whole file. Throws LoadError if it cannot be opened.
std::string read_file(const std::filesystem::path &path);

// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path &path,
                       std::string_view content);

}  // namespace typent

#endif  // TYPENT_UTIL_H_
