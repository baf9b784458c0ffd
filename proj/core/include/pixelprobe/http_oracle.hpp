/*
 * Copyright 2026 The PixelProbe Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PIXELPROBE_HTTP_ORACLE_HPP
#define PIXELPROBE_HTTP_ORACLE_HPP

#include <memory>
#include <string>

#include "pixelprobe/oracle.hpp"
#include "pixelprobe/wire.hpp"

namespace pixelprobe::oracle {

/// Client for a classifier served over the wire protocol (see wire.hpp).
///
/// A transport failure is retried once; a second failure raises
/// OracleUnavailable. Non-200 replies and malformed or off-simplex bodies raise
/// ProtocolError without a retry. Concurrent callers share a small pool of
/// keep-alive connections.
class HttpOracle final : public Oracle {
 public:
  struct Options {
    int connect_timeout_ms = 5000;
    int read_timeout_ms = 60000;
    int retries = 1;
  };

  /// Contacts GET /meta to learn the class count and input shape.
  explicit HttpOracle(std::string endpoint);
  HttpOracle(std::string endpoint, Options options);
  ~HttpOracle() override;

  HttpOracle(const HttpOracle&) = delete;
  HttpOracle& operator=(const HttpOracle&) = delete;

  const OracleDescriptor& descriptor() const override { return descriptor_; }
  std::vector<ClassProbabilities> classify_batch(std::span<const Image> images) const override;

  static wire::Meta fetch_meta(const std::string& endpoint, Options options);
  static wire::Meta fetch_meta(const std::string& endpoint) { return fetch_meta(endpoint, Options{}); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  OracleDescriptor descriptor_;
};

/// Serves an in-process oracle over the wire protocol. Used by the CLI's
/// `serve` subcommand and by the protocol tests.
class OracleServer {
 public:
  explicit OracleServer(const Oracle& oracle, std::string host = "127.0.0.1");
  ~OracleServer();

  OracleServer(const OracleServer&) = delete;
  OracleServer& operator=(const OracleServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Returns the bound port.
  int start(int port = 0);
  /// Binds and serves on the calling thread until stop() is called.
  void run(int port);
  void stop();

  int port() const { return port_; }
  std::string endpoint() const;
  /// Number of /classify requests answered so far.
  std::size_t classify_requests() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string host_;
  int port_ = -1;
};

}  // namespace pixelprobe::oracle

#endif  // PIXELPROBE_HTTP_ORACLE_HPP
