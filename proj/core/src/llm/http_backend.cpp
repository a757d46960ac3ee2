#include <cstdlib>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <regex>

#include "graphletqa/errors.hpp"
#include "graphletqa/llm/gateway.hpp"

namespace graphletqa::llm {

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(options_.base_url, m, url)) {
    throw ConfigError("endpoint URL must look like http(s)://host[:port][/path], got '" + options_.base_url + "'");
  }
  scheme_host_port_ = m[1].str();
  path_prefix_ = m[2].str();
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

BackendReply HttpBackend::send(const CompletionRequest& request) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  client.set_write_timeout(options_.timeout);

  httplib::Headers headers;
  if (!options_.api_key_env.empty()) {
    if (const char* key = std::getenv(options_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  const nlohmann::json body = {
      {"model", request.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.decoding.temperature},
      {"max_tokens", request.decoding.max_tokens},
  };

  BackendReply reply;
  auto res = client.Post(path_prefix_ + "/chat/completions", headers, body.dump(), "application/json");
  if (!res) {
    reply.transport_failed = true;
    reply.http_status = 0;
    reply.error = httplib::to_string(res.error());
    return reply;
  }
  reply.http_status = res->status;
  if (res->status < 200 || res->status >= 300) {
    reply.error = res->body.substr(0, 200);
    return reply;
  }
  auto parsed = nlohmann::json::parse(res->body, nullptr, false);
  try {
    if (parsed.is_discarded()) throw std::runtime_error("response body is not JSON");
    const auto& content = parsed.at("choices").at(0).at("message").at("content");
    reply.text = content.is_string() ? content.get<std::string>() : content.dump();
  } catch (const std::exception& e) {
    // A 200 without a usable completion is treated like a dropped connection.
    reply.transport_failed = true;
    reply.error = std::string("malformed completion response: ") + e.what();
  }
  return reply;
}

}  // namespace graphletqa::llm
