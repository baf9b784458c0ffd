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

#include "pixelprobe/http_oracle.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "pixelprobe/errors.hpp"

namespace pixelprobe::oracle {
namespace {

constexpr const char* kJson = "application/json";

std::unique_ptr<httplib::Client> make_client(const std::string& endpoint,
                                             const HttpOracle::Options& options) {
  auto client = std::make_unique<httplib::Client>(endpoint);
  if (!client->is_valid()) throw ContractViolation("invalid oracle endpoint '" + endpoint + "'");
  client->set_connection_timeout(std::chrono::milliseconds(options.connect_timeout_ms));
  client->set_read_timeout(std::chrono::milliseconds(options.read_timeout_ms));
  client->set_keep_alive(true);
  return client;
}

void require_ok(const httplib::Result& res, const std::string& what) {
  if (res->status != 200) {
    throw ProtocolError(what + " returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }
}

}  // namespace

struct HttpOracle::Impl {
  std::string endpoint;
  Options options;
  std::mutex mutex;
  std::vector<std::unique_ptr<httplib::Client>> idle;

  std::unique_ptr<httplib::Client> acquire() {
    {
      std::lock_guard lock(mutex);
      if (!idle.empty()) {
        auto client = std::move(idle.back());
        idle.pop_back();
        return client;
      }
    }
    return make_client(endpoint, options);
  }

  void release(std::unique_ptr<httplib::Client> client) {
    std::lock_guard lock(mutex);
    idle.push_back(std::move(client));
  }

  template <typename Send>
  httplib::Result send_with_retry(Send send, const std::string& what) {
    std::string last_error;
    for (int attempt = 0; attempt <= options.retries; ++attempt) {
      auto client = acquire();
      auto res = send(*client);
      if (res) {
        release(std::move(client));
        return res;
      }
      // Drop the connection; a retry starts on a fresh one.
      last_error = httplib::to_string(res.error());
    }
    throw OracleUnavailable(what + " to " + endpoint + " failed: " + last_error);
  }
};

HttpOracle::HttpOracle(std::string endpoint) : HttpOracle(std::move(endpoint), Options{}) {}

HttpOracle::HttpOracle(std::string endpoint, Options options)
    : impl_(std::make_unique<Impl>()) {
  impl_->endpoint = std::move(endpoint);
  impl_->options = options;
  const auto meta = fetch_meta(impl_->endpoint, options);
  descriptor_ = {OracleKind::external, meta.class_count, meta.shape, impl_->endpoint,
                 meta.name.empty() ? impl_->endpoint : meta.name};
}

HttpOracle::~HttpOracle() = default;

wire::Meta HttpOracle::fetch_meta(const std::string& endpoint, Options options) {
  Impl impl;
  impl.endpoint = endpoint;
  impl.options = options;
  auto res = impl.send_with_retry([](httplib::Client& c) { return c.Get("/meta"); }, "GET /meta");
  require_ok(res, "GET /meta");
  return wire::decode_meta(res->body);
}

std::vector<ClassProbabilities> HttpOracle::classify_batch(std::span<const Image> images) const {
  if (images.empty()) return {};
  require_input_shape(images);
  const std::string body = wire::encode_classify_request(images);
  auto res = impl_->send_with_retry(
      [&](httplib::Client& c) { return c.Post("/classify", body, kJson); }, "POST /classify");
  require_ok(res, "POST /classify");
  return wire::decode_classify_response(res->body, images.size(), class_count());
}

struct OracleServer::Impl {
  const Oracle& oracle;
  httplib::Server server;
  std::thread thread;
  std::atomic<std::size_t> classify_count{0};

  explicit Impl(const Oracle& o) : oracle(o) {
    server.Get("/meta", [this](const httplib::Request&, httplib::Response& res) {
      const auto& d = oracle.descriptor();
      res.set_content(wire::encode_meta({d.class_count, d.shape, d.name}), kJson);
    });
    server.Post("/classify", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto request = wire::decode_classify_request(req.body);
        const auto probs = oracle.classify_batch(request.images);
        res.set_content(wire::encode_classify_response(probs), kJson);
        ++classify_count;
      } catch (const ProtocolError& e) {
        res.status = 400;
        res.set_content(e.what(), "text/plain");
      } catch (const ContractViolation& e) {
        res.status = 400;
        res.set_content(e.what(), "text/plain");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(e.what(), "text/plain");
      }
    });
  }
};

OracleServer::OracleServer(const Oracle& oracle, std::string host)
    : impl_(std::make_unique<Impl>(oracle)), host_(std::move(host)) {}

OracleServer::~OracleServer() { stop(); }

int OracleServer::start(int port) {
  port_ = port == 0 ? impl_->server.bind_to_any_port(host_)
                    : (impl_->server.bind_to_port(host_, port) ? port : -1);
  if (port_ < 0) throw std::runtime_error("cannot bind oracle server on " + host_);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void OracleServer::run(int port) {
  if (!impl_->server.bind_to_port(host_, port)) {
    throw std::runtime_error("cannot bind oracle server on " + host_ + ":" + std::to_string(port));
  }
  port_ = port;
  impl_->server.listen_after_bind();
}

void OracleServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string OracleServer::endpoint() const { return "http://" + host_ + ":" + std::to_string(port_); }

std::size_t OracleServer::classify_requests() const { return impl_->classify_count.load(); }

}  // namespace pixelprobe::oracle
