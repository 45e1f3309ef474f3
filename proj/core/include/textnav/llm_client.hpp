#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "textnav/instruction.hpp"

namespace textnav {

/// Connection settings for a chat-completion endpoint.
struct LlmConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4";
  std::string api_key;  // may stay empty for local or replayed endpoints
  double timeout_seconds = 30.0;
  double temperature = 0.0;
  int max_in_flight = 4;
};

/// Reads TEXTNAV_LLM_BASE_URL, TEXTNAV_LLM_MODEL and TEXTNAV_LLM_API_KEY.
/// Returns nullopt when none of them is set.
std::optional<LlmConfig> llm_config_from_env();

/// The prompt texts. Defaults carry the stock wording; any of them can be
/// overridden. The extractor prompt serves both directions: a "{direction}"
/// placeholder is substituted when present, otherwise the literal
/// "left/right" is replaced by the requested direction word.
struct PromptSet {
  std::string turn_points_extractor =
      "Extract waypoints in the description of the navigation path. Then, "
      "extract the points which turn left/right.";
  std::string turn_points_checker =
      "For the following path, answer the action at specified point is turn "
      "right or left.";
  std::string implicit_reverse =
      "Show the reverse path, reversing the start and goal of the following "
      "path.";
  std::string implicit_combined =
      "Understand the spatial structure of path1-9 below and create the "
      "shortest path from the specified start to goal. However, be sure to "
      "indicate the action to be taken at each passing point.";
};

enum class LlmErrorKind {
  Transport,   ///< connection failed before a response arrived
  Status,      ///< non-2xx HTTP status
  Schema,      ///< response body missing the expected structure
  Timeout,     ///< the endpoint did not answer in time
  ReplayMiss,  ///< replay transcript holds no entry for this request
};

std::string_view llm_error_kind_name(LlmErrorKind kind) noexcept;

/// A failed endpoint exchange. Derives from BackendError so the extraction
/// pipeline can treat any client as a backend. `payload` carries the raw
/// response body (or transport detail) for diagnostics.
class LlmError : public BackendError {
public:
  LlmError(LlmErrorKind kind, const std::string& message, std::string payload);

  LlmErrorKind kind() const noexcept { return kind_; }
  const std::string& payload() const noexcept { return payload_; }

private:
  LlmErrorKind kind_;
  std::string payload_;
};

/// One chat-completion exchange: request body in, response body out.
/// Implementations throw LlmError on failure and never retry — retry
/// policy belongs to the extraction pipeline.
class ChatTransport {
public:
  virtual ~ChatTransport() = default;
  virtual nlohmann::json post_chat(const nlohmann::json& request) = 0;
};

/// A recorded sequence of exchanges, replayable without network access.
/// Stored as a JSON array of {"request": ..., "response": ...} pairs
/// (failed exchanges carry {"error": {"kind": ..., "message": ...}}).
class Transcript {
public:
  Transcript() = default;

  void record_success(nlohmann::json request, nlohmann::json response);
  void record_error(nlohmann::json request, const LlmError& error);

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<nlohmann::json>& entries() const noexcept {
    return entries_;
  }

  nlohmann::json to_json() const;
  static Transcript from_json(const nlohmann::json& j);

  void save(const std::filesystem::path& file) const;
  static Transcript load(const std::filesystem::path& file);

private:
  std::vector<nlohmann::json> entries_;
};

/// Live HTTP transport speaking the chat-completion wire format.
class HttpChatTransport : public ChatTransport {
public:
  HttpChatTransport(std::string base_url, std::string api_key,
                    double timeout_seconds);

  nlohmann::json post_chat(const nlohmann::json& request) override;

private:
  std::string origin_;       // scheme://host[:port]
  std::string path_prefix_;  // e.g. /v1
  std::string api_key_;
  double timeout_seconds_;
};

/// Decorator that appends every exchange to a transcript.
class RecordingChatTransport : public ChatTransport {
public:
  RecordingChatTransport(std::shared_ptr<ChatTransport> inner,
                         std::shared_ptr<Transcript> transcript);

  nlohmann::json post_chat(const nlohmann::json& request) override;

private:
  std::shared_ptr<ChatTransport> inner_;
  std::shared_ptr<Transcript> transcript_;
};

/// Serves responses from a transcript, matched by request body. Repeated
/// identical requests consume recorded entries in order; the last one
/// stays available for further repeats. Unmatched requests raise
/// LlmErrorKind::ReplayMiss.
class ReplayChatTransport : public ChatTransport {
public:
  explicit ReplayChatTransport(const Transcript& transcript);

  nlohmann::json post_chat(const nlohmann::json& request) override;

private:
  std::map<std::string, std::deque<nlohmann::json>> by_request_;
};

enum class ExtractDirection { Left, Right };
enum class ImplicitMode { Reverse, Combined };

/// Client for the three endpoint calls the system makes: structured
/// waypoint/turn-point extraction, structured turn checks, and the
/// free-text implicit queries. Calls are independent and never retried
/// internally; concurrent use is limited to `max_in_flight` requests.
class LlmClient {
public:
  LlmClient(LlmConfig config, PromptSet prompts,
            std::shared_ptr<ChatTransport> transport);

  /// One function-call request returning {"waypoints": [...],
  /// "turn_points": [...]}.
  std::pair<std::vector<std::string>, std::vector<std::string>> extract(
      ExtractDirection direction, const std::string& instruction);

  /// One function-call request whose answer is constrained to left/right.
  TurnSide check_turn(const std::string& instruction,
                      const std::string& waypoint);

  /// One free-text completion with the implicit-method prompt. For the
  /// combined mode the query names start and goal; the reverse mode
  /// ignores them. Throws std::invalid_argument on an empty instruction
  /// list.
  std::string implicit_query(ImplicitMode mode,
                             const std::vector<std::string>& instructions,
                             const std::string& start = {},
                             const std::string& goal = {});

  const LlmConfig& config() const noexcept { return config_; }

private:
  LlmConfig config_;
  PromptSet prompts_;
  std::shared_ptr<ChatTransport> transport_;
  struct Gate;
  std::shared_ptr<Gate> gate_;

  nlohmann::json send(nlohmann::json request);
};

/// Adapts an LlmClient to the extraction pipeline's backend interface.
class LlmExtractorBackend : public ExtractorBackend {
public:
  explicit LlmExtractorBackend(std::shared_ptr<LlmClient> client);

  Extraction extract_left(const std::string& instruction) override;
  Extraction extract_right(const std::string& instruction) override;
  TurnSide check_turn(const std::string& instruction,
                      const NodeName& waypoint) override;

private:
  std::shared_ptr<LlmClient> client_;

  Extraction extract(ExtractDirection direction,
                     const std::string& instruction);
};

}  // namespace textnav
