#include "callmask/remote.hpp"

#include "callmask/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace callmask {

std::string parse_remote_spec(std::string_view spec) {
  if (!spec.starts_with("remote:")) throw Error(ErrorCode::BadSpec, "model spec must start with 'remote:'");
  std::string endpoint(spec.substr(7));
  // Built without TLS support.
  if (!endpoint.starts_with("http://")) {
    throw Error(ErrorCode::BadSpec, "remote endpoint must be an http:// URL: " + endpoint);
  }
  return endpoint;
}

RemoteTextModel::RemoteTextModel(std::string endpoint, int timeout_seconds) : timeout_seconds_(timeout_seconds) {
  auto scheme = endpoint.find("://");
  if (scheme == std::string::npos) throw Error(ErrorCode::BadSpec, "endpoint lacks a scheme: " + endpoint);
  auto slash = endpoint.find('/', scheme + 3);
  base_ = endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : endpoint.substr(slash);
  if (base_.size() == scheme + 3) throw Error(ErrorCode::BadSpec, "endpoint lacks a host: " + endpoint);
}

std::string RemoteTextModel::complete(std::string_view prompt) {
  httplib::Client client(base_);
  client.set_connection_timeout(timeout_seconds_);
  client.set_read_timeout(timeout_seconds_);
  nlohmann::json body = {{"prompt", std::string(prompt)}};
  auto res = client.Post(path_, body.dump(), "application/json");
  Transcript t{std::string(prompt), {}, 0};
  if (!res) {
    transcripts_.push_back(t);
    throw Error(ErrorCode::Io, "request to " + base_ + path_ + " failed: " + httplib::to_string(res.error()));
  }
  t.status = res->status;
  t.response = res->body;
  transcripts_.push_back(t);
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::Io, "remote model returned HTTP " + std::to_string(res->status));
  }
  auto reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_object() && reply.contains("text") && reply["text"].is_string()) return reply["text"].get<std::string>();
  return res->body;
}

std::string RemoteTextModel::transcripts_jsonl() const {
  std::string out;
  for (const auto& t : transcripts_) {
    nlohmann::ordered_json j;
    j["prompt"] = t.prompt;
    j["status"] = t.status;
    j["response"] = t.response;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace callmask
