/* Copyright 2026 The confit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CONFIT_HTTP_PROVIDER_HPP_
#define CONFIT_HTTP_PROVIDER_HPP_

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include "httplib.h"
#include "json.hpp"

#include "confit/augment.hpp"
#include "confit/common.hpp"

namespace confit {

inline constexpr const char* kProviderUrlEnv = "CONFIT_PROVIDER_URL";
inline constexpr const char* kProviderTokenEnv = "CONFIT_PROVIDER_TOKEN";

struct RetryPolicy {
  std::size_t max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  double backoff_multiplier = 2.0;
  std::chrono::milliseconds max_backoff{5000};

  /// Delay before retry number `retry` (0-based).
  std::chrono::milliseconds backoff(std::size_t retry) const {
    double ms = static_cast<double>(initial_backoff.count());
    for (std::size_t i = 0; i < retry; ++i) ms *= backoff_multiplier;
    ms = std::min(ms, static_cast<double>(max_backoff.count()));
    return std::chrono::milliseconds(static_cast<long long>(ms));
  }
};

struct HttpProviderOptions {
  /// Service root, e.g. "http://localhost:8080" or "http://host/api".
  std::string endpoint;
  /// Sent as "Authorization: Bearer <token>" when set.
  std::optional<std::string> token;
  std::chrono::milliseconds timeout{30000};
  RetryPolicy retry;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\v\f");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\v\f");
  return std::string(s.substr(b, e - b + 1));
}

inline std::optional<std::string> getenv_string(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

}  // namespace detail

/// Client for POST {endpoint}/paraphrase with body
/// {"prompt", "temperature", "seed"} answering {"text"}. Transport failures
/// and non-2xx statuses are retried with exponential backoff; a malformed or
/// empty answer is not.
class HttpParaphraseProvider final : public ParaphraseProvider {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpParaphraseProvider(HttpProviderOptions opts, Sleeper sleep = {})
      : opts_(std::move(opts)), sleep_(std::move(sleep)) {
    if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    if (!opts_.token) opts_.token = detail::getenv_string(kProviderTokenEnv);
    split_endpoint();
  }

  std::string paraphrase(const ParaphraseRequest& req) override {
    const std::string body = nlohmann::json{{"prompt", req.prompt()},
                                            {"temperature", req.temperature},
                                            {"seed", req.seed}}
                                 .dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    std::string last_error;
    for (std::size_t attempt = 0; attempt <= opts_.retry.max_retries; ++attempt) {
      if (attempt > 0) sleep_(opts_.retry.backoff(attempt - 1));
      try {
        return post_once(body);
      } catch (const ProviderError& e) {
        if (!e.retryable()) throw;
        last_error = e.what();
      }
    }
    throw ProviderError("paraphrase request to " + opts_.endpoint + " failed after " +
                            std::to_string(opts_.retry.max_retries + 1) +
                            " attempts: " + last_error,
                        false);
  }

  std::string name() const override { return "http(" + opts_.endpoint + ")"; }

  const HttpProviderOptions& options() const noexcept { return opts_; }

 private:
  void split_endpoint() {
    const auto scheme_end = opts_.endpoint.find("://");
    if (scheme_end == std::string::npos) {
      throw ArgumentError("provider endpoint must start with http:// or https://, got \"" +
                          opts_.endpoint + "\"");
    }
    const auto path_start = opts_.endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      origin_ = opts_.endpoint;
      base_path_.clear();
    } else {
      origin_ = opts_.endpoint.substr(0, path_start);
      base_path_ = opts_.endpoint.substr(path_start);
      while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
    }
  }

  std::string post_once(const std::string& body) {
    // One client per call: providers may be driven from several threads.
    httplib::Client client(origin_);
    if (!client.is_valid()) {
      throw ProviderError("unsupported provider endpoint \"" + opts_.endpoint + "\"", false);
    }
    const auto secs = opts_.timeout.count() / 1000;
    const auto usecs = (opts_.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (opts_.token) headers.emplace("Authorization", "Bearer " + *opts_.token);

    const auto res = client.Post(base_path_ + "/paraphrase", headers, body, "application/json");
    if (!res) {
      throw ProviderError("transport error: " + httplib::to_string(res.error()), true);
    }
    if (res->status < 200 || res->status >= 300) {
      throw ProviderError("HTTP status " + std::to_string(res->status), true);
    }
    if (res->body.empty()) throw ProviderError("empty response body", false);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      throw ProviderError("response is not JSON", false);
    }
    if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
      throw ProviderError("response lacks a string \"text\" field", false);
    }
    auto text = detail::trim(j["text"].get<std::string>());
    if (text.empty()) throw ProviderError("provider returned empty text", false);
    return text;
  }

  HttpProviderOptions opts_;
  Sleeper sleep_;
  std::string origin_;
  std::string base_path_;
};

/// Paraphrase one request against `endpoint` with default retry settings.
inline std::string http_paraphrase(const ParaphraseRequest& req, const std::string& endpoint) {
  HttpProviderOptions opts;
  opts.endpoint = endpoint;
  HttpParaphraseProvider provider(std::move(opts));
  return provider.paraphrase(req);
}

}  // namespace confit

#endif  // CONFIT_HTTP_PROVIDER_HPP_
