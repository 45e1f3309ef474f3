// textnav: compile natural-language route instructions into a topological
// map and answer start/goal queries with freshly generated instructions.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "textnav/evaluator.hpp"
#include "textnav/instruction.hpp"
#include "textnav/llm_client.hpp"
#include "textnav/rng.hpp"
#include "textnav/router.hpp"

namespace {

using namespace textnav;

// exit-code taxonomy, so scripts can branch without reading prose
enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kParseError = 2,
  kMapConflict = 3,
  kUnknownNode = 4,
  kNoPath = 5,
  kInsufficientInformation = 6,
  kIoError = 7,
};

int fail(ExitCode code, const std::string& message) {
  std::cerr << "textnav: " << message << '\n';
  return code;
}

struct InstructionLine {
  int line_number;
  std::string text;
};

std::vector<InstructionLine> read_instructions(
    const std::filesystem::path& file, bool blocks) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + file.string());
  }
  std::vector<InstructionLine> out;
  std::string line;
  int line_number = 0;
  InstructionLine block{1, ""};
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const bool blank = line.find_first_not_of(" \t") == std::string::npos;
    if (!blocks) {
      if (!blank) {
        out.push_back({line_number, line});
      }
      continue;
    }
    if (blank) {
      if (!block.text.empty()) {
        out.push_back(block);
        block.text.clear();
      }
      continue;
    }
    if (block.text.empty()) {
      block.line_number = line_number;
      block.text = line;
    } else {
      block.text += " " + line;
    }
  }
  if (blocks && !block.text.empty()) {
    out.push_back(block);
  }
  return out;
}

// ---------------------------------------------------------------------------
// backend selection shared by parse/build/eval
// ---------------------------------------------------------------------------

struct BackendOptions {
  std::string backend = "grammar";
  int max_retries = 3;
  std::string replay_transcript;
  std::string capture_transcript;

  void attach(CLI::App& cmd) {
    cmd.add_option("--backend", backend, "Instruction backend")
        ->check(CLI::IsMember({"grammar", "llm"}))
        ->capture_default_str();
    cmd.add_option("--max-retries", max_retries,
                   "Extraction attempts before giving up")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd.add_option("--replay-transcript", replay_transcript,
                   "Answer endpoint calls from this transcript file");
    cmd.add_option("--capture-transcript", capture_transcript,
                   "Record endpoint calls into this transcript file");
  }
};

/// Owns whatever the chosen backend needs (clients, transcripts) and saves
/// a capture file when the run ends.
struct BackendBundle {
  BackendBundle() = default;
  BackendBundle(BackendBundle&&) = default;
  BackendBundle& operator=(BackendBundle&&) = default;

  std::unique_ptr<GrammarBackend> grammar;
  std::shared_ptr<LlmClient> client;
  std::unique_ptr<LlmExtractorBackend> llm_backend;
  std::shared_ptr<Transcript> capture;
  std::string capture_file;
  RetryBudget budget;
  std::string id = "grammar";

  ExtractorBackend& backend() {
    if (grammar) {
      return *grammar;
    }
    return *llm_backend;
  }

  ~BackendBundle() {
    if (capture && !capture_file.empty()) {
      try {
        capture->save(capture_file);
      } catch (const std::exception& e) {
        std::cerr << "textnav: could not save transcript: " << e.what()
                  << '\n';
      }
    }
  }
};

std::shared_ptr<LlmClient> make_llm_client(const BackendOptions& options,
                                           BackendBundle& bundle) {
  std::shared_ptr<ChatTransport> transport;
  LlmConfig config = llm_config_from_env().value_or(LlmConfig{});
  if (!options.replay_transcript.empty()) {
    transport = std::make_shared<ReplayChatTransport>(
        Transcript::load(options.replay_transcript));
  } else {
    const auto env_config = llm_config_from_env();
    if (!env_config) {
      throw CLI::ValidationError(
          "llm backend needs TEXTNAV_LLM_BASE_URL / TEXTNAV_LLM_MODEL / "
          "TEXTNAV_LLM_API_KEY or --replay-transcript");
    }
    config = *env_config;
    transport = std::make_shared<HttpChatTransport>(
        config.base_url, config.api_key, config.timeout_seconds);
  }
  if (!options.capture_transcript.empty()) {
    bundle.capture = std::make_shared<Transcript>();
    bundle.capture_file = options.capture_transcript;
    transport =
        std::make_shared<RecordingChatTransport>(transport, bundle.capture);
  }
  return std::make_shared<LlmClient>(config, PromptSet{}, transport);
}

BackendBundle make_backend(const BackendOptions& options) {
  BackendBundle bundle;
  bundle.budget = RetryBudget{options.max_retries};
  if (options.backend == "grammar") {
    bundle.grammar = std::make_unique<GrammarBackend>();
    bundle.id = "grammar";
    return bundle;
  }
  bundle.client = make_llm_client(options, bundle);
  bundle.llm_backend = std::make_unique<LlmExtractorBackend>(bundle.client);
  bundle.id = options.replay_transcript.empty()
                  ? "llm:" + bundle.client->config().model
                  : "llm:replay";
  return bundle;
}

// text -> canonical path via the selected backend; grammar uses the parser
// directly so byte offsets survive into diagnostics
std::variant<CanonicalPath, std::string> convert_instruction(
    BackendBundle& bundle, const std::string& text) {
  if (bundle.grammar) {
    auto result = parse_instruction(text);
    if (const auto* error = std::get_if<ParseError>(&result)) {
      return "byte " + std::to_string(error->offset) + ": " + error->message;
    }
    return std::get<CanonicalPath>(std::move(result));
  }
  auto result = extract_canonical(text, bundle.backend(), bundle.budget);
  if (const auto* success = std::get_if<ExtractionSuccess>(&result)) {
    return success->path;
  }
  const auto& error = std::get<ExtractionError>(result);
  return error.message + " (after " + std::to_string(error.attempts) +
         " attempt(s))";
}

AngleThreshold threshold_option(double theta) {
  try {
    return AngleThreshold{theta};
  } catch (const std::invalid_argument& e) {
    throw CLI::ValidationError(std::string("--theta: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_parse(const std::filesystem::path& input, bool blocks,
              const BackendOptions& options) {
  BackendBundle bundle = make_backend(options);
  const auto instructions = read_instructions(input, blocks);
  bool any_failed = false;
  for (const auto& [line_number, text] : instructions) {
    auto converted = convert_instruction(bundle, text);
    if (const auto* path = std::get_if<CanonicalPath>(&converted)) {
      nlohmann::json j;
      to_json(j, *path);
      std::cout << j.dump() << '\n';
    } else {
      any_failed = true;
      std::cerr << input.string() << ":" << line_number << ": "
                << std::get<std::string>(converted) << '\n';
    }
  }
  return any_failed ? kParseError : kOk;
}

int cmd_build(const std::filesystem::path& input,
              const std::filesystem::path& output, bool blocks,
              const BackendOptions& options) {
  BackendBundle bundle = make_backend(options);
  const auto instructions = read_instructions(input, blocks);
  TopoMap map;
  for (const auto& [line_number, text] : instructions) {
    auto converted = convert_instruction(bundle, text);
    if (const auto* error = std::get_if<std::string>(&converted)) {
      return fail(kParseError, input.string() + ":" +
                                   std::to_string(line_number) + ": " +
                                   *error);
    }
    const auto conflict = map.add_path(std::get<CanonicalPath>(converted));
    if (conflict) {
      return fail(kMapConflict, input.string() + ":" +
                                    std::to_string(line_number) + ": " +
                                    conflict->describe());
    }
  }
  save_map(output, map);
  std::cerr << "textnav: wrote " << output.string() << " ("
            << map.node_count() << " nodes, " << map.edge_count()
            << " edges, " << map.action_count() << " actions)\n";
  return kOk;
}

int cmd_query(const std::filesystem::path& map_file, const std::string& start,
              const std::string& goal) {
  const TopoMap map = load_map(map_file);
  const auto conflicts = map.check_consistency();
  if (!conflicts.empty()) {
    return fail(kMapConflict,
                "map is inconsistent: " + conflicts.front().describe());
  }
  RouteResult result =
      find_route(map, RouteQuery{NodeName{start}, NodeName{goal}});
  if (const auto* path = std::get_if<CanonicalPath>(&result)) {
    std::cout << generate_instruction(*path) << '\n';
    return kOk;
  }
  const auto& failure = std::get<RouteFailure>(result);
  const int code = failure.kind == RouteFailure::Kind::UnknownNode
                       ? kUnknownNode
                       : failure.kind == RouteFailure::Kind::NoPath
                             ? kNoPath
                             : kInsufficientInformation;
  return fail(static_cast<ExitCode>(code), failure.describe());
}

int cmd_gen_env(std::uint64_t seed, int nodes, int designated, double theta,
                const std::filesystem::path& output) {
  const GeoEnvironment env =
      generate_environment(seed, nodes, designated, threshold_option(theta));
  save_environment(output, env);
  std::cerr << "textnav: wrote " << output.string() << " ("
            << env.node_count() << " nodes, " << env.edge_count()
            << " edges)\n";
  return kOk;
}

int cmd_sample(const std::filesystem::path& env_file, std::uint64_t seed,
               double theta, const std::filesystem::path& output) {
  const GeoEnvironment env = load_environment(env_file);
  const PathDataset dataset =
      sample_dataset(env, seed, threshold_option(theta));
  save_dataset(output, dataset);
  std::cerr << "textnav: wrote " << output.string() << " ("
            << dataset.items.size() << " routes)\n";
  return kOk;
}

struct EvalOptions {
  std::string task = "reverse";
  std::string method = "explicit";
  std::string env_file;
  std::string dataset_file;
  int environments = 10;
  int nodes = 12;
  std::uint64_t seed = 1;
  double theta = std::numbers::pi / 4.0;
  bool json = false;
  BackendOptions backend;
};

int cmd_eval(const EvalOptions& options) {
  const AngleThreshold theta = threshold_option(options.theta);

  // assemble the environment/dataset list: explicit files or seeded batch
  std::vector<std::pair<GeoEnvironment, PathDataset>> runs;
  if (!options.env_file.empty() || !options.dataset_file.empty()) {
    if (options.env_file.empty() || options.dataset_file.empty()) {
      throw CLI::ValidationError("--env and --dataset go together");
    }
    runs.emplace_back(load_environment(options.env_file),
                      load_dataset(options.dataset_file));
  } else {
    for (int i = 0; i < options.environments; ++i) {
      const std::uint64_t env_seed =
          DeterministicRng::derive_seed(options.seed,
                                        static_cast<std::uint64_t>(i));
      GeoEnvironment env =
          generate_environment(env_seed, options.nodes, 5, theta);
      PathDataset dataset =
          sample_dataset(env, DeterministicRng::derive_seed(env_seed, 1),
                         theta);
      runs.emplace_back(std::move(env), std::move(dataset));
    }
  }

  BackendBundle bundle;
  EvalMethodContext method = ExplicitMethod{};
  if (options.method == "explicit") {
    bundle = make_backend(options.backend);
    method = ExplicitMethod{&bundle.backend(), bundle.budget, bundle.id};
  } else {
    bundle.budget = RetryBudget{options.backend.max_retries};
    bundle.client = make_llm_client(options.backend, bundle);
    method = ImplicitMethod{bundle.client.get(),
                            options.backend.replay_transcript.empty()
                                ? "llm:" + bundle.client->config().model
                                : "llm:replay"};
  }

  std::optional<EvalReport> report;
  for (const auto& [env, dataset] : runs) {
    EvalReport part = options.task == "reverse"
                          ? eval_reverse(dataset, method)
                          : eval_combined(env, dataset, method, theta);
    if (report) {
      report->merge(part);
    } else {
      report = std::move(part);
    }
  }
  if (!report) {
    throw CLI::ValidationError("nothing to evaluate");
  }
  if (options.json) {
    std::cout << report_to_json(*report).dump(2) << '\n';
  } else {
    std::cout << report_to_table(*report);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "textnav: remember natural-language route instructions as a "
      "topological map and answer new start/goal queries"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "textnav 0.1.0");

  // parse
  auto* parse = app.add_subcommand(
      "parse", "Convert instructions to canonical JSON, one per line");
  std::string parse_input;
  bool parse_blocks = false;
  BackendOptions parse_backend;
  parse->add_option("input", parse_input, "Instruction file")->required();
  parse->add_flag("--blocks", parse_blocks,
                  "Instructions are blank-line separated blocks");
  parse_backend.attach(*parse);

  // build
  auto* build = app.add_subcommand(
      "build", "Build a map file from an instruction file");
  std::string build_input;
  std::string build_output = "map.json";
  bool build_blocks = false;
  BackendOptions build_backend;
  build->add_option("input", build_input, "Instruction file")->required();
  build->add_option("-o,--output", build_output, "Map file to write")
      ->capture_default_str();
  build->add_flag("--blocks", build_blocks,
                  "Instructions are blank-line separated blocks");
  build_backend.attach(*build);

  // query
  auto* query = app.add_subcommand(
      "query", "Answer a start/goal query with instruction text");
  std::string query_map;
  std::string query_start;
  std::string query_goal;
  query->add_option("map", query_map, "Map file")->required();
  query->add_option("start", query_start, "Start node name")->required();
  query->add_option("goal", query_goal, "Goal node name")->required();

  // gen-env
  auto* gen_env = app.add_subcommand(
      "gen-env", "Generate a synthetic ground-truth environment");
  std::uint64_t gen_seed = 1;
  int gen_nodes = 12;
  int gen_designated = 5;
  double gen_theta = std::numbers::pi / 4.0;
  std::string gen_output = "env.json";
  gen_env->add_option("--seed", gen_seed, "Generation seed")
      ->capture_default_str();
  gen_env->add_option("--nodes", gen_nodes, "Node count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_env->add_option("--designated", gen_designated,
                      "Start/goal candidate count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_env->add_option("--theta", gen_theta,
                      "Quantization threshold in radians")
      ->capture_default_str();
  gen_env->add_option("-o,--output", gen_output, "Environment file to write")
      ->capture_default_str();

  // sample
  auto* sample = app.add_subcommand(
      "sample", "Sample the 10-route evaluation dataset of an environment");
  std::string sample_env;
  std::uint64_t sample_seed = 1;
  double sample_theta = std::numbers::pi / 4.0;
  std::string sample_output = "dataset.json";
  sample->add_option("env", sample_env, "Environment file")->required();
  sample->add_option("--seed", sample_seed, "Sampling seed")
      ->capture_default_str();
  sample->add_option("--theta", sample_theta,
                     "Quantization threshold in radians")
      ->capture_default_str();
  sample->add_option("-o,--output", sample_output, "Dataset file to write")
      ->capture_default_str();

  // eval
  auto* eval = app.add_subcommand(
      "eval", "Run the reverse or combined evaluation protocol");
  EvalOptions eval_options;
  eval->add_option("--task", eval_options.task, "Evaluation task")
      ->check(CLI::IsMember({"reverse", "combined"}))
      ->capture_default_str();
  eval->add_option("--method", eval_options.method, "Pipeline under test")
      ->check(CLI::IsMember({"explicit", "implicit"}))
      ->capture_default_str();
  eval->add_option("--env", eval_options.env_file,
                   "Environment file (with --dataset)");
  eval->add_option("--dataset", eval_options.dataset_file,
                   "Dataset file (with --env)");
  eval->add_option("--environments", eval_options.environments,
                   "Seeded environments to generate when no files are given")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval->add_option("--nodes", eval_options.nodes,
                   "Node count for generated environments")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval->add_option("--seed", eval_options.seed, "Batch seed")
      ->capture_default_str();
  eval->add_option("--theta", eval_options.theta,
                   "Quantization threshold in radians")
      ->capture_default_str();
  eval->add_flag("--json", eval_options.json,
                 "Emit the JSON report instead of the table");
  eval_options.backend.attach(*eval);

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse->parsed()) {
      return cmd_parse(parse_input, parse_blocks, parse_backend);
    }
    if (build->parsed()) {
      return cmd_build(build_input, build_output, build_blocks,
                       build_backend);
    }
    if (query->parsed()) {
      return cmd_query(query_map, query_start, query_goal);
    }
    if (gen_env->parsed()) {
      return cmd_gen_env(gen_seed, gen_nodes, gen_designated, gen_theta,
                         gen_output);
    }
    if (sample->parsed()) {
      return cmd_sample(sample_env, sample_seed, sample_theta, sample_output);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_options);
    }
  } catch (const CLI::ValidationError& e) {
    return fail(kConfigError, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kConfigError, e.what());
  } catch (const std::runtime_error& e) {
    return fail(kIoError, e.what());
  }
  return kConfigError;
}
