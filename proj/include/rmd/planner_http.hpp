#ifndef RMD_PLANNER_HTTP_HPP_
#define RMD_PLANNER_HTTP_HPP_

// Live planner transport. Kept out of the umbrella header so that only
// binaries talking to an endpoint pay for httplib.

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

// Before httplib: <resolv.h> defines a `_res` macro that breaks Eigen headers.
#include "rmd/planner.hpp"

#include <httplib.h>

namespace rmd {

struct EndpointConfig {
  std::string url;  // e.g. http://host:8080/v1/plan
  std::string api_key;
  int timeout_s = 60;
};

//! Reads RMD_VLM_URL / RMD_VLM_KEY; empty optional when no URL is set.
inline std::optional<EndpointConfig> endpoint_from_env(int timeout_s = 60) {
  const char* url = std::getenv("RMD_VLM_URL");
  if (url == nullptr || *url == '\0') return std::nullopt;
  EndpointConfig cfg;
  cfg.url = url;
  if (const char* key = std::getenv("RMD_VLM_KEY")) cfg.api_key = key;
  cfg.timeout_s = timeout_s;
  return cfg;
}

/*
 * One multipart POST: a "prompt" text field plus an optional "image" file.
 * The reply body may be plain text or a JSON object with a "content" string.
 * A failed attempt is retried once.
 */
inline PlannerTransport http_transport(const EndpointConfig& cfg) {
  return [cfg](const std::string& prompt, const std::string& image_ref) {
    const auto scheme_end = cfg.url.find("://");
    const auto path_start = cfg.url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    const std::string origin = cfg.url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : cfg.url.substr(path_start);

    httplib::MultipartFormDataItems items{{"prompt", prompt, "", "text/plain"}};
    if (!image_ref.empty() && std::filesystem::exists(image_ref))
      items.push_back({"image", read_text_file(image_ref),
                       std::filesystem::path(image_ref).filename().string(),
                       "application/octet-stream"});
    httplib::Headers headers;
    if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);

    std::string failure;
    for (int attempt = 0; attempt < 2; ++attempt) {
      httplib::Client client(origin);
      client.set_connection_timeout(cfg.timeout_s, 0);
      client.set_read_timeout(cfg.timeout_s, 0);
      client.set_write_timeout(cfg.timeout_s, 0);
      auto res = client.Post(path, headers, items);
      if (!res) {
        failure = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        failure = "endpoint returned HTTP " + std::to_string(res->status);
        continue;
      }
      const auto body = nlohmann::json::parse(res->body, nullptr, false);
      if (body.is_object() && body.contains("content") && body["content"].is_string())
        return body["content"].get<std::string>();
      return res->body;
    }
    throw TransportError(failure);
  };
}

}  // namespace rmd

#endif  // RMD_PLANNER_HTTP_HPP_
