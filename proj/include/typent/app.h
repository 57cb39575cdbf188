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

#ifndef TYPENT_APP_H_
#define TYPENT_APP_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "typent/inference.h"
#include "typent/scoring.h"
#include "typent/training.h"

namespace typent {

// Flat experiment configuration. File form is a single JSON object whose
// keys match the member names below (see README for the full table).
struct RunConfig {
  std::string dataset_name = "ufet";
  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string vocab_path;
  std::string tier_path;
  // Split used by render, predict and eval.
  std::string split = "test";

  // overlap | table:PATH | stub:PATH | lexical[:PATH] | exec:CMD |
  // tcp:HOST:PORT
  std::string scorer = "overlap";
  bool scorer_trainable = false;
  int64_t scorer_timeout_ms = 60000;
  std::string cache_path;

  TrainingConfig training;
  double learning_rate = 1.0;
  int hash_bits = 18;

  PredictionConfig prediction;
  std::string threshold_path;
  size_t topk = 10;
  std::vector<double> grid;
  std::string objective = "loose_macro_f1";

  std::string predictions_path;
  std::vector<size_t> bucket_edges;
  double fewshot_fraction = 0.4;

  uint64_t seed = 0;
  std::string out_dir = "out";

  nlohmann::json to_json() const;
};

// Builds a RunConfig from an optional JSON file plus KEY=VALUE overrides.
// Relative paths in the file resolve against the file's directory.
RunConfig load_run_config(const std::filesystem::path &config_path,
                          const std::vector<std::string> &overrides);
RunConfig run_config_from_json(const nlohmann::json &doc,
                               const std::filesystem::path &base_dir = {});

// Scorer from a spec string such as "overlap" or "exec:python3 server.py".
std::unique_ptr<EntailmentScorer> make_scorer(const RunConfig &config);

// Commands. Each returns the process exit status and writes its artifacts
// into config.out_dir plus a run_manifest.json.
int cmd_render(const RunConfig &config);
int cmd_train(const RunConfig &config);
int cmd_predict(const RunConfig &config);
int cmd_eval(const RunConfig &config);
int cmd_tune(const RunConfig &config);
int cmd_split_fewshot(const RunConfig &config);

// Entry point shared by the typent binary and the tests.
int run_cli(int argc, char **argv);
int run_cli(const std::vector<std::string> &args);

}  // namespace typent

#endif  // TYPENT_APP_H_
