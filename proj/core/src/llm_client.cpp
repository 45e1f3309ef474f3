#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "textnav/llm_client.hpp"

#include <httplib.h>

#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>

namespace textnav {

namespace {

const char* getenv_or_null(const char* name) {
  return std::getenv(name);
}

std::string replace_all(std::string text, std::string_view needle,
                        std::string_view replacement) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), replacement);
    pos += replacement.size();
  }
  return text;
}

}  // namespace

std::optional<LlmConfig> llm_config_from_env() {
  const char* base_url = getenv_or_null("TEXTNAV_LLM_BASE_URL");
  const char* model = getenv_or_null("TEXTNAV_LLM_MODEL");
  const char* api_key = getenv_or_null("TEXTNAV_LLM_API_KEY");
  if (!base_url && !model && !api_key) {
    return std::nullopt;
  }
  LlmConfig config;
  if (base_url) {
    config.base_url = base_url;
  }
  if (model) {
    config.model = model;
  }
  if (api_key) {
    config.api_key = api_key;
  }
  return config;
}

std::string_view llm_error_kind_name(LlmErrorKind kind) noexcept {
  switch (kind) {
    case LlmErrorKind::Transport:
      return "transport";
    case LlmErrorKind::Status:
      return "status";
    case LlmErrorKind::Schema:
      return "schema";
    case LlmErrorKind::Timeout:
      return "timeout";
    case LlmErrorKind::ReplayMiss:
      return "replay-miss";
  }
  return "unknown";
}

namespace {

LlmErrorKind llm_error_kind_from_name(std::string_view name) {
  for (LlmErrorKind kind :
       {LlmErrorKind::Transport, LlmErrorKind::Status, LlmErrorKind::Schema,
        LlmErrorKind::Timeout, LlmErrorKind::ReplayMiss}) {
    if (llm_error_kind_name(kind) == name) {
      return kind;
    }
  }
  throw std::runtime_error("unknown llm error kind \"" + std::string(name) +
                           "\" in transcript");
}

}  // namespace

LlmError::LlmError(LlmErrorKind kind, const std::string& message,
                   std::string payload)
    : BackendError(std::string(llm_error_kind_name(kind)) + " error: " +
                   message),
      kind_(kind),
      payload_(std::move(payload)) {}

// ---------------------------------------------------------------------------
// transcript
// ---------------------------------------------------------------------------

void Transcript::record_success(nlohmann::json request,
                                nlohmann::json response) {
  entries_.push_back(nlohmann::json{{"request", std::move(request)},
                                    {"response", std::move(response)}});
}

void Transcript::record_error(nlohmann::json request, const LlmError& error) {
  entries_.push_back(nlohmann::json{
      {"request", std::move(request)},
      {"error",
       nlohmann::json{{"kind", std::string(llm_error_kind_name(error.kind()))},
                      {"message", error.what()},
                      {"payload", error.payload()}}}});
}

nlohmann::json Transcript::to_json() const {
  return nlohmann::json(entries_);
}

Transcript Transcript::from_json(const nlohmann::json& j) {
  if (!j.is_array()) {
    throw std::runtime_error("a transcript must be a JSON array");
  }
  Transcript t;
  for (const auto& entry : j) {
    if (!entry.is_object() || !entry.contains("request") ||
        (!entry.contains("response") && !entry.contains("error"))) {
      throw std::runtime_error(
          "transcript entries need a request and a response or error: " +
          entry.dump());
    }
    t.entries_.push_back(entry);
  }
  return t;
}

void Transcript::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + file.string() + " for writing");
  }
  out << to_json().dump(2) << '\n';
}

Transcript Transcript::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + file.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("cannot parse " + file.string() + ": " +
                             e.what());
  }
  return from_json(j);
}

// ---------------------------------------------------------------------------
// transports
// ---------------------------------------------------------------------------

HttpChatTransport::HttpChatTransport(std::string base_url, std::string api_key,
                                     double timeout_seconds)
    : api_key_(std::move(api_key)), timeout_seconds_(timeout_seconds) {
  if (timeout_seconds_ <= 0.0) {
    throw std::invalid_argument("timeout must be positive");
  }
  std::string_view url = base_url;
  std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos ||
      (url.substr(0, scheme_end) != "http" &&
       url.substr(0, scheme_end) != "https")) {
    throw std::invalid_argument("base url must start with http:// or "
                                "https://, got \"" +
                                base_url + "\"");
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string_view::npos) {
    origin_ = base_url;
  } else {
    origin_ = std::string(url.substr(0, path_start));
    path_prefix_ = std::string(url.substr(path_start));
    while (!path_prefix_.empty() && path_prefix_.back() == '/') {
      path_prefix_.pop_back();
    }
  }
  if (origin_.size() <= scheme_end + 3) {
    throw std::invalid_argument("base url lacks a host: \"" + base_url + "\"");
  }
}

nlohmann::json HttpChatTransport::post_chat(const nlohmann::json& request) {
  httplib::Client client(origin_);
  const auto seconds = static_cast<time_t>(timeout_seconds_);
  const auto microseconds =
      static_cast<time_t>((timeout_seconds_ - static_cast<double>(seconds)) *
                          1e6);
  client.set_connection_timeout(seconds, microseconds);
  client.set_read_timeout(seconds, microseconds);
  client.set_write_timeout(seconds, microseconds);
  httplib::Headers headers;
  if (!api_key_.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key_);
  }
  const std::string body = request.dump();
  auto result = client.Post(path_prefix_ + "/chat/completions", headers, body,
                            "application/json");
  if (!result) {
    const auto error = result.error();
    const std::string detail = httplib::to_string(error);
    if (error == httplib::Error::ConnectionTimeout ||
        error == httplib::Error::Read || error == httplib::Error::Write) {
      throw LlmError(LlmErrorKind::Timeout,
                     "no response within " +
                         std::to_string(timeout_seconds_) + "s (" + detail +
                         ")",
                     detail);
    }
    throw LlmError(LlmErrorKind::Transport, "request failed: " + detail,
                   detail);
  }
  if (result->status < 200 || result->status >= 300) {
    throw LlmError(LlmErrorKind::Status,
                   "endpoint answered HTTP " + std::to_string(result->status),
                   result->body);
  }
  try {
    return nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::exception& e) {
    throw LlmError(LlmErrorKind::Schema,
                   std::string("response body is not JSON: ") + e.what(),
                   result->body);
  }
}

RecordingChatTransport::RecordingChatTransport(
    std::shared_ptr<ChatTransport> inner,
    std::shared_ptr<Transcript> transcript)
    : inner_(std::move(inner)), transcript_(std::move(transcript)) {
  if (!inner_ || !transcript_) {
    throw std::invalid_argument(
        "recording transport needs an inner transport and a transcript");
  }
}

nlohmann::json RecordingChatTransport::post_chat(
    const nlohmann::json& request) {
  try {
    nlohmann::json response = inner_->post_chat(request);
    transcript_->record_success(request, response);
    return response;
  } catch (const LlmError& error) {
    transcript_->record_error(request, error);
    throw;
  }
}

ReplayChatTransport::ReplayChatTransport(const Transcript& transcript) {
  for (const auto& entry : transcript.entries()) {
    by_request_[entry.at("request").dump()].push_back(entry);
  }
}

nlohmann::json ReplayChatTransport::post_chat(const nlohmann::json& request) {
  const auto it = by_request_.find(request.dump());
  if (it == by_request_.end()) {
    throw LlmError(LlmErrorKind::ReplayMiss,
                   "transcript holds no entry for this request",
                   request.dump());
  }
  // consume entries in recorded order; the final one stays sticky so
  // deterministic repeats keep working
  nlohmann::json entry = it->second.front();
  if (it->second.size() > 1) {
    it->second.pop_front();
  }
  if (entry.contains("error")) {
    const auto& error = entry.at("error");
    throw LlmError(
        llm_error_kind_from_name(error.at("kind").get<std::string>()),
        error.value("message", std::string("replayed failure")),
        error.value("payload", std::string()));
  }
  return entry.at("response");
}

// ---------------------------------------------------------------------------
// client
// ---------------------------------------------------------------------------

struct LlmClient::Gate {
  explicit Gate(int limit) : available(limit) {}

  std::mutex mutex;
  std::condition_variable cv;
  int available;

  struct Slot {
    Gate& gate;
    explicit Slot(Gate& g) : gate(g) {
      std::unique_lock lock(gate.mutex);
      gate.cv.wait(lock, [&] { return gate.available > 0; });
      --gate.available;
    }
    ~Slot() {
      {
        std::lock_guard lock(gate.mutex);
        ++gate.available;
      }
      gate.cv.notify_one();
    }
  };
};

LlmClient::LlmClient(LlmConfig config, PromptSet prompts,
                     std::shared_ptr<ChatTransport> transport)
    : config_(std::move(config)),
      prompts_(std::move(prompts)),
      transport_(std::move(transport)) {
  if (!transport_) {
    throw std::invalid_argument("llm client needs a transport");
  }
  if (config_.base_url.empty()) {
    throw std::invalid_argument("llm config lacks a base url");
  }
  if (config_.timeout_seconds <= 0.0) {
    throw std::invalid_argument("llm timeout must be positive");
  }
  if (config_.temperature < 0.0) {
    throw std::invalid_argument("llm temperature cannot be negative");
  }
  if (config_.max_in_flight < 1) {
    throw std::invalid_argument("llm in-flight limit must be at least 1");
  }
  gate_ = std::make_shared<Gate>(config_.max_in_flight);
}

nlohmann::json LlmClient::send(nlohmann::json request) {
  Gate::Slot slot(*gate_);
  return transport_->post_chat(request);
}

namespace {

nlohmann::json tool_call_arguments(const nlohmann::json& response) {
  try {
    const auto& message = response.at("choices").at(0).at("message");
    std::string arguments;
    if (message.contains("tool_calls")) {
      arguments = message.at("tool_calls")
                      .at(0)
                      .at("function")
                      .at("arguments")
                      .get<std::string>();
    } else if (message.contains("function_call")) {
      arguments = message.at("function_call").at("arguments")
                      .get<std::string>();
    } else {
      throw LlmError(LlmErrorKind::Schema,
                     "response carries no function call", response.dump());
    }
    return nlohmann::json::parse(arguments);
  } catch (const nlohmann::json::exception& e) {
    throw LlmError(LlmErrorKind::Schema,
                   std::string("cannot read function-call arguments: ") +
                       e.what(),
                   response.dump());
  }
}

std::vector<std::string> string_list(const nlohmann::json& arguments,
                                     const std::string& field,
                                     const nlohmann::json& response) {
  if (!arguments.contains(field) || !arguments.at(field).is_array()) {
    throw LlmError(LlmErrorKind::Schema,
                   "arguments lack the \"" + field + "\" list",
                   response.dump());
  }
  std::vector<std::string> out;
  for (const auto& item : arguments.at(field)) {
    if (!item.is_string()) {
      throw LlmError(LlmErrorKind::Schema,
                     "\"" + field + "\" holds a non-string entry",
                     response.dump());
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

std::pair<std::vector<std::string>, std::vector<std::string>>
LlmClient::extract(ExtractDirection direction,
                   const std::string& instruction) {
  const std::string direction_word =
      direction == ExtractDirection::Left ? "left" : "right";
  std::string prompt = prompts_.turn_points_extractor;
  if (prompt.find("{direction}") != std::string::npos) {
    prompt = replace_all(prompt, "{direction}", direction_word);
  } else {
    prompt = replace_all(prompt, "left/right", direction_word);
  }

  nlohmann::json request{
      {"model", config_.model},
      {"temperature", config_.temperature},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", prompt}},
                              {{"role", "user"}, {"content", instruction}}})},
      {"tools",
       nlohmann::json::array(
           {{{"type", "function"},
             {"function",
              {{"name", "report_route_extraction"},
               {"description",
                "Report the waypoints of the path in order and the subset "
                "of waypoints where the walker turns " +
                    direction_word + "."},
               {"parameters",
                {{"type", "object"},
                 {"properties",
                  {{"waypoints",
                    {{"type", "array"}, {"items", {{"type", "string"}}}}},
                   {"turn_points",
                    {{"type", "array"}, {"items", {{"type", "string"}}}}}}},
                 {"required",
                  nlohmann::json::array({"waypoints", "turn_points"})}}}}}}})},
      {"tool_choice",
       {{"type", "function"},
        {"function", {{"name", "report_route_extraction"}}}}}};

  const nlohmann::json response = send(std::move(request));
  const nlohmann::json arguments = tool_call_arguments(response);
  return {string_list(arguments, "waypoints", response),
          string_list(arguments, "turn_points", response)};
}

TurnSide LlmClient::check_turn(const std::string& instruction,
                               const std::string& waypoint) {
  nlohmann::json request{
      {"model", config_.model},
      {"temperature", config_.temperature},
      {"messages",
       nlohmann::json::array(
           {{{"role", "system"}, {"content", prompts_.turn_points_checker}},
            {{"role", "user"},
             {"content",
              "Path: " + instruction + "\nPoint: " + waypoint}}})},
      {"tools",
       nlohmann::json::array(
           {{{"type", "function"},
             {"function",
              {{"name", "report_turn_direction"},
               {"description",
                "Report whether the walker turns left or right at the "
                "specified point."},
               {"parameters",
                {{"type", "object"},
                 {"properties",
                  {{"direction",
                    {{"type", "string"},
                     {"enum", nlohmann::json::array({"left", "right"})}}}}},
                 {"required", nlohmann::json::array({"direction"})}}}}}}})},
      {"tool_choice",
       {{"type", "function"},
        {"function", {{"name", "report_turn_direction"}}}}}};

  const nlohmann::json response = send(std::move(request));
  const nlohmann::json arguments = tool_call_arguments(response);
  if (!arguments.contains("direction") ||
      !arguments.at("direction").is_string()) {
    throw LlmError(LlmErrorKind::Schema, "arguments lack a direction",
                   response.dump());
  }
  const std::string direction = arguments.at("direction").get<std::string>();
  if (direction == "left") {
    return TurnSide::Left;
  }
  if (direction == "right") {
    return TurnSide::Right;
  }
  throw LlmError(LlmErrorKind::Schema,
                 "direction must be left or right, got \"" + direction + "\"",
                 response.dump());
}

std::string LlmClient::implicit_query(
    ImplicitMode mode, const std::vector<std::string>& instructions,
    const std::string& start, const std::string& goal) {
  if (instructions.empty()) {
    throw std::invalid_argument("implicit query needs at least one "
                                "instruction");
  }
  std::string content;
  if (mode == ImplicitMode::Reverse) {
    for (const auto& instruction : instructions) {
      content += instruction + "\n";
    }
  } else {
    for (std::size_t i = 0; i < instructions.size(); ++i) {
      content += "path" + std::to_string(i + 1) + ": " + instructions[i] +
                 "\n";
    }
    content += "start: " + start + "\ngoal: " + goal + "\n";
  }

  nlohmann::json request{
      {"model", config_.model},
      {"temperature", config_.temperature},
      {"messages",
       nlohmann::json::array(
           {{{"role", "system"},
             {"content", mode == ImplicitMode::Reverse
                             ? prompts_.implicit_reverse
                             : prompts_.implicit_combined}},
            {{"role", "user"}, {"content", content}}})}};

  const nlohmann::json response = send(std::move(request));
  try {
    return response.at("choices").at(0).at("message").at("content")
        .get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw LlmError(LlmErrorKind::Schema,
                   std::string("response carries no message content: ") +
                       e.what(),
                   response.dump());
  }
}

// ---------------------------------------------------------------------------
// backend adapter
// ---------------------------------------------------------------------------

LlmExtractorBackend::LlmExtractorBackend(std::shared_ptr<LlmClient> client)
    : client_(std::move(client)) {
  if (!client_) {
    throw std::invalid_argument("backend needs a client");
  }
}

Extraction LlmExtractorBackend::extract(ExtractDirection direction,
                                        const std::string& instruction) {
  const auto [waypoints, turn_points] =
      client_->extract(direction, instruction);
  Extraction out;
  try {
    for (const auto& w : waypoints) {
      out.waypoints.emplace_back(w);
    }
    for (const auto& t : turn_points) {
      out.turn_points.emplace(t);
    }
  } catch (const std::invalid_argument& e) {
    throw LlmError(LlmErrorKind::Schema,
                   std::string("endpoint answered an unusable node name: ") +
                       e.what(),
                   "");
  }
  return out;
}

Extraction LlmExtractorBackend::extract_left(const std::string& instruction) {
  return extract(ExtractDirection::Left, instruction);
}

Extraction LlmExtractorBackend::extract_right(const std::string& instruction) {
  return extract(ExtractDirection::Right, instruction);
}

TurnSide LlmExtractorBackend::check_turn(const std::string& instruction,
                                         const NodeName& waypoint) {
  return client_->check_turn(instruction, waypoint.text());
}

}  // namespace textnav
