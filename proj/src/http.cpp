/* Copyright 2026 The SDA Authors. All Rights Reserved.

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

#include "sda/http.hpp"

#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace sda {
namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw TransportError("malformed endpoint URL: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

  HttpResponse post(const std::string& url, const HttpHeaders& headers,
                    const std::string& body) override {
    auto [origin, path] = split_url(url);
    httplib::Client client(origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(path, h, body, "application/json");
    if (!res) {
      throw TransportError("POST " + url + " failed: " +
                           httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }

 private:
  std::chrono::seconds timeout_;
};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport(std::chrono::seconds timeout) {
  return std::make_shared<HttplibTransport>(timeout);
}

RetryPolicy RetryPolicy::standard() {
  RetryPolicy p;
  p.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  return p;
}

bool is_retryable_status(int status) {
  return status == 429 || (status >= 500 && status <= 599);
}

HttpResponse post_with_retry(HttpTransport& transport, const RetryPolicy& policy,
                             const std::string& url, const HttpHeaders& headers,
                             const std::string& body) {
  const int attempts = policy.max_attempts < 1 ? 1 : policy.max_attempts;
  auto backoff = policy.initial_backoff;
  std::string last_failure;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    try {
      HttpResponse res = transport.post(url, headers, body);
      if (res.status >= 200 && res.status < 300) return res;
      last_failure = "HTTP " + std::to_string(res.status);
      if (!is_retryable_status(res.status)) {
        throw BackendError("POST " + url + " returned " + last_failure + ": " +
                           res.body.substr(0, 200));
      }
    } catch (const TransportError& e) {
      last_failure = e.what();
    }
    if (attempt < attempts) {
      if (policy.sleep) policy.sleep(backoff);
      backoff = std::chrono::milliseconds(static_cast<long long>(
          static_cast<double>(backoff.count()) * policy.backoff_multiplier));
    }
  }
  throw BackendError("POST " + url + " failed after " +
                     std::to_string(attempts) + " attempts: " + last_failure);
}

}  // namespace sda
