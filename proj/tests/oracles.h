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

#ifndef TYPENT_TESTS_ORACLES_H_
#define TYPENT_TESTS_ORACLES_H_

// Test-only reference implementations. They share no code with the library's
// metric, bucketing or loss paths and are deliberately naive.

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace typent::oracle {

struct Counts {
  double p_macro = 0, r_macro = 0, f_macro = 0;
  double p_micro = 0, r_micro = 0, f_micro = 0;
};

inline double harmonic(double p, double r) {
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

// Brute force over a label universe indexed 0..n-1, with sets as bitmasks.
inline Counts brute_force_metrics(const std::vector<uint32_t> &chosen,
                                  const std::vector<uint32_t> &gold,
                                  int n_labels) {
  Counts c;
  double hit_total = 0, chosen_total = 0, gold_total = 0;
  for (size_t i = 0; i < chosen.size(); ++i) {
    int hit = 0, nc = 0, ng = 0;
    for (int l = 0; l < n_labels; ++l) {
      const bool in_c = (chosen[i] >> l) & 1u;
      const bool in_g = (gold[i] >> l) & 1u;
      hit += in_c && in_g;
      nc += in_c;
      ng += in_g;
    }
    c.p_macro += nc ? static_cast<double>(hit) / nc : 0.0;
    c.r_macro += static_cast<double>(hit) / ng;
    hit_total += hit;
    chosen_total += nc;
    gold_total += ng;
  }
  const double n = static_cast<double>(chosen.size());
  c.p_macro /= n;
  c.r_macro /= n;
  c.f_macro = harmonic(c.p_macro, c.r_macro);
  c.p_micro = chosen_total > 0 ? hit_total / chosen_total : 0.0;
  c.r_micro = gold_total > 0 ? hit_total / gold_total : 0.0;
  c.f_micro = harmonic(c.p_micro, c.r_micro);
  return c;
}

// Direct per-label occurrence count over training gold sets.
inline std::map<std::string, int> label_counts(
    const std::vector<std::set<std::string>> &train_golds) {
  std::map<std::string, int> counts;
  for (const auto &g : train_golds)
    for (const auto &l : g) counts[l] += 1;
  return counts;
}

// Restrict-then-score, written without the library's loose_macro.
struct NaivePRF {
  double p = 0, r = 0, f = 0;
  int n = 0;
};

inline NaivePRF naive_restricted_macro(
    const std::vector<std::set<std::string>> &chosen,
    const std::vector<std::set<std::string>> &gold,
    const std::set<std::string> &bucket) {
  NaivePRF out;
  for (size_t i = 0; i < gold.size(); ++i) {
    std::vector<std::string> g, c;
    for (const auto &l : gold[i])
      if (bucket.find(l) != bucket.end()) g.push_back(l);
    if (g.empty()) continue;
    for (const auto &l : chosen[i])
      if (bucket.find(l) != bucket.end()) c.push_back(l);
    int hit = 0;
    for (const auto &x : c)
      for (const auto &y : g) hit += (x == y);
    out.p += c.empty() ? 0.0 : static_cast<double>(hit) / c.size();
    out.r += static_cast<double>(hit) / g.size();
    out.n += 1;
  }
  if (out.n) {
    out.p /= out.n;
    out.r /= out.n;
  }
  out.f = harmonic(out.p, out.r);
  return out;
}

// Fixed-point image of a double in [0, 2) at scale 2^60. Every score used by
// the tests (multiples of 2^-53 and doubles >= 2^-8) is exact at this scale.
inline __int128 fixed60(double x) {
  const double scaled = std::ldexp(x, 60);
  if (!(x >= 0.0 && x < 2.0) || std::floor(scaled) != scaled)
    throw std::domain_error("value not exact at scale 2^-60");
  return static_cast<__int128>(scaled);
}

// The ranking loss evaluated exactly in integers, rounded once to double.
inline double ranking_loss_formula(double pos, double neg, double margin) {
  const __int128 v = fixed60(neg) - fixed60(pos) + fixed60(margin);
  if (v <= 0) return 0.0;
  return std::ldexp(static_cast<double>(v), -60);
}

// Whether pos >= neg + margin for the real numbers the doubles denote.
inline bool exact_margin_met(double pos, double neg, double margin) {
  return fixed60(pos) >= fixed60(neg) + fixed60(margin);
}

}  // namespace typent::oracle

#endif  // TYPENT_TESTS_ORACLES_H_
