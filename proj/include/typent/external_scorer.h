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

#ifndef TYPENT_EXTERNAL_SCORER_H_
#define TYPENT_EXTERNAL_SCORER_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <sys/types.h>

#include "json.hpp"
#include "typent/scoring.h"

namespace typent {

// Bidirectional line-oriented transport.
class LineChannel {
 public:
  virtual ~LineChannel() = default;

  // Throws TransportError if the peer is gone.
  virtual void write_line(std::string_view line) = 0;

  // Next line without the terminator, or nullopt on end of stream. Throws
  // TransportError when nothing arrives within the timeout.
  virtual std::optional<std::string> read_line(
      std::chrono::milliseconds timeout) = 0;

  virtual std::string describe() const = 0;
};

// Shared buffered reader/writer over a pair of file descriptors.
class FdChannel : public LineChannel {
 public:
  ~FdChannel() override;

  void write_line(std::string_view line) override;
  std::optional<std::string> read_line(
      std::chrono::milliseconds timeout) override;

 protected:
  FdChannel() = default;
  void close_fds();

  int read_fd_ = -1;
  int write_fd_ = -1;
  bool socket_ = false;

 private:
  std::string buffer_;
  bool eof_ = false;
};

// Runs `/bin/sh -c command` and talks to its stdin/stdout.
class ProcessChannel : public FdChannel {
 public:
  explicit ProcessChannel(const std::string &command);
  ~ProcessChannel() override;

  std::string describe() const override { return "exec:" + command_; }

 private:
  std::string command_;
  pid_t pid_ = -1;
};

// TCP connection to host:port.
class TcpChannel : public FdChannel {
 public:
  TcpChannel(const std::string &host, uint16_t port);

  std::string describe() const override;

 private:
  std::string host_;
  uint16_t port_;
};

struct ExternalScorerOptions {
  std::chrono::milliseconds timeout{60000};
  // Requests in flight before responses are drained.
  size_t chunk_size = 64;
  // Whether the endpoint implements the loss/update/snapshot/restore ops.
  bool trainable = false;
};

// Entailment scorer backed by an external model speaking line-delimited JSON:
//   request  {"id": "...", "premise": "...", "hypothesis": "..."}
//   response {"id": "...", "entailment": x}
// Trainable endpoints additionally answer requests carrying "op":
//   {"op":"loss","id","positive":{premise,hypothesis},"negatives":[...],
//    "margin","weight"}                      -> {"id","loss"}
//   {"op":"update","id"}                      -> {"id","ok":true}
//   {"op":"snapshot","id"}                    -> {"id","tag"}
//   {"op":"restore","id","tag"}               -> {"id","ok":true}
class ExternalScorer : public TrainableScorer {
 public:
  ExternalScorer(std::unique_ptr<LineChannel> channel,
                 ExternalScorerOptions options = {});

  double score(const PremiseHypothesisPair &pair) const override;
  std::vector<double> score_batch(
      std::span<const PremiseHypothesisPair> pairs) const override;
  std::string version_tag() const override;
  bool trainable() const override { return options_.trainable; }

  double accumulate_ranking_loss(const PremiseHypothesisPair &positive,
                                 std::span<const PremiseHypothesisPair> negatives,
                                 double margin, double weight) override;
  void apply_update() override;
  std::string snapshot() override;
  void restore(const std::string &tag) override;

 private:
  std::string next_id() const;
  void score_chunk(std::span<const PremiseHypothesisPair> pairs,
                   std::span<double> out) const;
  nlohmann::json call(nlohmann::json request);
  void require_trainable(std::string_view op) const;

  std::unique_ptr<LineChannel> channel_;
  ExternalScorerOptions options_;
  mutable std::mutex mu_;
  mutable uint64_t next_id_ = 0;
  uint64_t version_ = 0;
};

// Parses "exec:COMMAND" or "tcp:HOST:PORT" into a channel.
std::unique_ptr<LineChannel> open_channel(std::string_view endpoint);

}  // namespace typent

#endif  // TYPENT_EXTERNAL_SCORER_H_
