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

#include "typent/external_scorer.h"

#include <arpa/inet.h>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <unordered_map>

#include "typent/errors.h"
#include "typent/util.h"

namespace typent {

using nlohmann::json;

// FdChannel.

FdChannel::~FdChannel() { close_fds(); }

void FdChannel::close_fds() {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
  read_fd_ = write_fd_ = -1;
}

void FdChannel::write_line(std::string_view line) {
  std::string data(line);
  data += '\n';
  size_t written = 0;
  while (written < data.size()) {
    ssize_t n = socket_ ? ::send(write_fd_, data.data() + written,
                                 data.size() - written, MSG_NOSIGNAL)
                        : ::write(write_fd_, data.data() + written,
                                  data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError("write to " + describe() +
                           " failed: " + std::strerror(errno));
    }
    written += static_cast<size_t>(n);
  }
}

std::optional<std::string> FdChannel::read_line(
    std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    size_t nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (eof_) {
      if (buffer_.empty()) return std::nullopt;
      std::string line = std::move(buffer_);
      buffer_.clear();
      return line;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      throw TransportError("timed out waiting for " + describe());
    }
    pollfd pfd{read_fd_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw TransportError("poll on " + describe() +
                           " failed: " + std::strerror(errno));
    }
    if (rc == 0) continue;
    char chunk[4096];
    ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw TransportError("read from " + describe() +
                           " failed: " + std::strerror(errno));
    }
    if (n == 0) {
      eof_ = true;
    } else {
      buffer_.append(chunk, static_cast<size_t>(n));
    }
  }
}

// ProcessChannel.

ProcessChannel::ProcessChannel(const std::string &command) : command_(command) {
  // A dead endpoint must surface as a write error, not kill the process.
  std::signal(SIGPIPE, SIG_IGN);
  int to_child[2], from_child[2];
  if (::pipe(to_child) != 0) throw TransportError("pipe failed");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw TransportError("pipe failed");
  }
  pid_ = ::fork();
  if (pid_ < 0) {
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]})
      ::close(fd);
    throw TransportError("fork failed for " + command);
  }
  if (pid_ == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]})
      ::close(fd);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char *>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  write_fd_ = to_child[1];
  read_fd_ = from_child[0];
}

ProcessChannel::~ProcessChannel() {
  close_fds();
  if (pid_ > 0) {
    int status = 0;
    // Give the child a moment to exit on EOF before forcing it.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
      ::usleep(10000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
}

// TcpChannel.

TcpChannel::TcpChannel(const std::string &host, uint16_t port)
    : host_(host), port_(port) {
  socket_ = true;
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo *res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(),
                             &hints, &res);
      rc != 0) {
    throw TransportError("cannot resolve " + describe() + ": " +
                         ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo *ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw TransportError("cannot connect to " + describe());
  read_fd_ = write_fd_ = fd;
}

std::string TcpChannel::describe() const {
  return "tcp:" + host_ + ":" + std::to_string(port_);
}

std::unique_ptr<LineChannel> open_channel(std::string_view endpoint) {
  if (endpoint.rfind("exec:", 0) == 0) {
    return std::make_unique<ProcessChannel>(std::string(endpoint.substr(5)));
  }
  if (endpoint.rfind("tcp:", 0) == 0) {
    std::string_view rest = endpoint.substr(4);
    size_t colon = rest.rfind(':');
    if (colon == std::string_view::npos)
      throw ConfigError("tcp endpoint must be tcp:HOST:PORT");
    int port = 0;
    try {
      port = std::stoi(std::string(rest.substr(colon + 1)));
    } catch (const std::exception &) {
      port = -1;
    }
    if (port <= 0 || port > 65535)
      throw ConfigError("bad port in endpoint '" + std::string(endpoint) + "'");
    return std::make_unique<TcpChannel>(std::string(rest.substr(0, colon)),
                                        static_cast<uint16_t>(port));
  }
  throw ConfigError("unknown endpoint '" + std::string(endpoint) +
                    "' (expected exec:COMMAND or tcp:HOST:PORT)");
}

// ExternalScorer.

ExternalScorer::ExternalScorer(std::unique_ptr<LineChannel> channel,
                               ExternalScorerOptions options)
    : channel_(std::move(channel)), options_(options) {
  if (options_.chunk_size == 0) options_.chunk_size = 1;
}

std::string ExternalScorer::next_id() const {
  return "r" + std::to_string(next_id_++);
}

double ExternalScorer::score(const PremiseHypothesisPair &pair) const {
  return score_batch(std::span<const PremiseHypothesisPair>(&pair, 1)).front();
}

std::vector<double> ExternalScorer::score_batch(
    std::span<const PremiseHypothesisPair> pairs) const {
  std::vector<double> out(pairs.size());
  std::lock_guard lock(mu_);
  for (size_t start = 0; start < pairs.size(); start += options_.chunk_size) {
    size_t n = std::min(options_.chunk_size, pairs.size() - start);
    score_chunk(pairs.subspan(start, n), std::span<double>(out).subspan(start, n));
  }
  return out;
}

namespace {

json parse_response(const std::string &line, const std::string &endpoint) {
  json resp;
  try {
    resp = json::parse(line);
  } catch (const json::parse_error &) {
    throw ProtocolError("malformed response from " + endpoint + ": " + line);
  }
  if (!resp.is_object() || !resp.contains("id") || !resp["id"].is_string())
    throw ProtocolError("response without id from " + endpoint);
  if (resp.contains("error")) {
    throw ProtocolError("endpoint " + endpoint + " reported: " +
                        resp["error"].dump());
  }
  return resp;
}

}  // namespace

void ExternalScorer::score_chunk(std::span<const PremiseHypothesisPair> pairs,
                                 std::span<double> out) const {
  std::unordered_map<std::string, size_t> pending;
  for (size_t i = 0; i < pairs.size(); ++i) {
    std::string id = next_id();
    json req{{"id", id},
             {"premise", pairs[i].premise},
             {"hypothesis", pairs[i].hypothesis}};
    channel_->write_line(req.dump());
    pending.emplace(std::move(id), i);
  }
  const size_t expected = pairs.size();
  size_t received = 0;
  while (!pending.empty()) {
    std::optional<std::string> line;
    try {
      line = channel_->read_line(options_.timeout);
    } catch (const TransportError &) {
      if (received == 0) throw;
      line.reset();
    }
    if (!line) {
      if (received == 0)
        throw TransportError("endpoint " + channel_->describe() +
                             " closed without responding");
      throw ProtocolError("expected " + std::to_string(expected) +
                          " responses from " + channel_->describe() +
                          ", received " + std::to_string(received));
    }
    if (trim(*line).empty()) continue;
    json resp = parse_response(*line, channel_->describe());
    auto it = pending.find(resp["id"].get<std::string>());
    if (it == pending.end()) {
      throw ProtocolError("unexpected or duplicate response id " +
                          resp["id"].dump() + " from " + channel_->describe());
    }
    const json &value = resp.contains("entailment") ? resp["entailment"] : json();
    if (!value.is_number())
      throw ProtocolError("response " + resp["id"].dump() +
                          " lacks a numeric entailment score");
    const double x = value.get<double>();
    if (!(x >= 0.0 && x <= 1.0)) {
      throw ProtocolError("entailment score " + value.dump() +
                          " outside [0, 1] from " + channel_->describe());
    }
    out[it->second] = x;
    pending.erase(it);
    ++received;
  }
}

json ExternalScorer::call(json request) {
  std::lock_guard lock(mu_);
  const std::string id = next_id();
  request["id"] = id;
  channel_->write_line(request.dump());
  for (;;) {
    auto line = channel_->read_line(options_.timeout);
    if (!line) {
      throw TransportError("endpoint " + channel_->describe() +
                           " closed during '" +
                           request.value("op", std::string("score")) + "'");
    }
    if (trim(*line).empty()) continue;
    json resp = parse_response(*line, channel_->describe());
    if (resp["id"] != id)
      throw ProtocolError("response id " + resp["id"].dump() +
                          " does not match request " + id);
    return resp;
  }
}

void ExternalScorer::require_trainable(std::string_view op) const {
  if (!options_.trainable) {
    throw ConfigError("external endpoint is not configured as trainable (op '" +
                      std::string(op) + "')");
  }
}

std::string ExternalScorer::version_tag() const {
  return "external-v" + std::to_string(version_);
}

double ExternalScorer::accumulate_ranking_loss(
    const PremiseHypothesisPair &positive,
    std::span<const PremiseHypothesisPair> negatives, double margin,
    double weight) {
  require_trainable("loss");
  json negs = json::array();
  for (const auto &n : negatives)
    negs.push_back({{"premise", n.premise}, {"hypothesis", n.hypothesis}});
  json resp = call({{"op", "loss"},
                    {"positive",
                     {{"premise", positive.premise},
                      {"hypothesis", positive.hypothesis}}},
                    {"negatives", std::move(negs)},
                    {"margin", margin},
                    {"weight", weight}});
  if (!resp.contains("loss") || !resp["loss"].is_number())
    throw ProtocolError("loss response without numeric 'loss'");
  const double loss = resp["loss"].get<double>();
  if (!(loss >= 0.0)) throw ProtocolError("negative loss from endpoint");
  return loss;
}

void ExternalScorer::apply_update() {
  require_trainable("update");
  json resp = call({{"op", "update"}});
  if (!resp.value("ok", false))
    throw TrainingError("endpoint rejected update");
  ++version_;
}

std::string ExternalScorer::snapshot() {
  require_trainable("snapshot");
  json resp = call({{"op", "snapshot"}});
  if (!resp.contains("tag") || !resp["tag"].is_string())
    throw ProtocolError("snapshot response without string 'tag'");
  return resp["tag"].get<std::string>();
}

void ExternalScorer::restore(const std::string &tag) {
  require_trainable("restore");
  json resp = call({{"op", "restore"}, {"tag", tag}});
  if (!resp.value("ok", false))
    throw TrainingError("endpoint could not restore '" + tag + "'");
  // Scores after a restore may differ from the current version.
  ++version_;
}

}  // namespace typent
