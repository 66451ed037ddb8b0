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

#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sda/error.hpp"

namespace sda {

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Connection-level failure: no HTTP status was received.
class TransportError : public BackendError {
 public:
  explicit TransportError(const std::string& what) : BackendError(what) {}
};

// Minimal POST-only transport so backends can be exercised against stubs.
// Implementations must be safe to call from several threads at once.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url, const HttpHeaders& headers,
                            const std::string& body) = 0;
};

// cpp-httplib backed transport; one client per call.
std::shared_ptr<HttpTransport> make_http_transport(
    std::chrono::seconds timeout = std::chrono::seconds(120));

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_multiplier = 2.0;
  // Replaced in tests to avoid real sleeps.
  std::function<void(std::chrono::milliseconds)> sleep;

  static RetryPolicy standard();
};

// True for statuses worth retrying: 429 and 5xx.
bool is_retryable_status(int status);

// POSTs `body` and returns the first 2xx response. Transport errors, 429 and
// 5xx are retried up to `policy.max_attempts` in total; any other status
// fails immediately. Throws BackendError once attempts are exhausted.
HttpResponse post_with_retry(HttpTransport& transport, const RetryPolicy& policy,
                             const std::string& url, const HttpHeaders& headers,
                             const std::string& body);

}  // namespace sda
