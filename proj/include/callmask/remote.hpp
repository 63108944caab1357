#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "callmask/evalharness.hpp"

namespace callmask {

/// Text-only model behind HTTP. POSTs {"prompt": ...} to the endpoint and
/// reads "text" from a JSON reply (or the raw body when it is not JSON).
/// Every exchange is kept as a transcript; no sampling settings are sent.
class RemoteTextModel final : public TextModel {
 public:
  struct Transcript {
    std::string prompt;
    std::string response;
    int status = 0;
  };

  /// `endpoint` is http://host[:port]/path. Throws Error(BadSpec).
  explicit RemoteTextModel(std::string endpoint, int timeout_seconds = 60);

  /// Throws Error(Io) on transport failure or a non-2xx status.
  std::string complete(std::string_view prompt) override;

  const std::vector<Transcript>& transcripts() const { return transcripts_; }
  /// One JSON object per line.
  std::string transcripts_jsonl() const;

 private:
  std::string base_;
  std::string path_;
  int timeout_seconds_;
  std::vector<Transcript> transcripts_;
};

/// Accepts `remote:<endpoint>`; returns the endpoint. Throws Error(BadSpec).
std::string parse_remote_spec(std::string_view spec);

}  // namespace callmask
