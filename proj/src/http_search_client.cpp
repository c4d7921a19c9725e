/* Copyright 2026 The conceptkit Authors. All Rights Reserved.

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

#include <cstdlib>

#include "conceptkit/error.hpp"
#include "conceptkit/search_ingest.hpp"
#include "httplib.h"

namespace conceptkit {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("endpoint '" + url + "' has no scheme");
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

void configure(httplib::Client& cli, double timeout) {
  auto secs = static_cast<time_t>(timeout);
  cli.set_connection_timeout(secs, 0);
  cli.set_read_timeout(secs, 0);
  cli.set_follow_location(true);
}

}  // namespace

HttpSearchClient::HttpSearchClient(std::string endpoint, std::string api_key, double timeout_seconds)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), timeout_(timeout_seconds) {
  split_url(endpoint_);
}

SearchResponse HttpSearchClient::search(const std::string& query, int count) {
  auto [origin, path] = split_url(endpoint_);
  httplib::Client cli(origin);
  configure(cli, timeout_);
  httplib::Params params{{"q", query}, {"count", std::to_string(count)}, {"safeSearch", "Strict"}};
  httplib::Headers headers{{"Ocp-Apim-Subscription-Key", api_key_}};
  auto res = cli.Get(path, params, headers);
  SearchResponse out;
  if (!res) {
    out.status = 0;
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  if (res->has_header("Retry-After")) out.retry_after = std::atof(res->get_header_value("Retry-After").c_str());
  if (res->status != 200) {
    out.error = res->body.substr(0, 200);
    return out;
  }
  try {
    out.hits = parse_search_page(json::parse(res->body));
  } catch (const std::exception& e) {
    out.status = 0;
    out.error = std::string("unparseable response: ") + e.what();
  }
  return out;
}

ImageGetter http_image_getter(double timeout_seconds) {
  return [timeout_seconds](const std::string& url) -> std::optional<std::string> {
    try {
      auto [origin, path] = split_url(url);
      httplib::Client cli(origin);
      configure(cli, timeout_seconds);
      auto res = cli.Get(path);
      if (!res || res->status != 200) return std::nullopt;
      return res->body;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
}

}  // namespace conceptkit
