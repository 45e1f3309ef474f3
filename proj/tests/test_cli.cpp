#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <nlohmann/json.hpp>

#include "support/cli_runner.hpp"
#include "support/fake_transport.hpp"
#include "support/test_util.hpp"
#include "textnav/envsim.hpp"
#include "textnav/instruction.hpp"

using namespace textnav;
using namespace textnav::testing;

namespace {

const std::string kCli = TEXTNAV_CLI_PATH;

const char* kToyInstructions =
    "Depart from n1 to n2. Then, turn right and proceed to n3.\n"
    "Depart from n1 to n2. Then, proceed to n4. Then, turn left and proceed "
    "to n5.\n";

}  // namespace

TEST_CASE("parse emits one canonical JSON object per instruction") {
  ScratchDir dir{"cli-parse"};
  write_file(dir.path / "routes.txt", kToyInstructions);
  const CliResult result = run_cli(kCli, "parse routes.txt", dir.path);
  CHECK(result.exit_code == 0);
  std::istringstream lines(result.out);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(nlohmann::json::parse(line) ==
        nlohmann::json{{"waypoints", {"n1", "n2", "n3"}},
                       {"actions", {"R"}}});
  REQUIRE(std::getline(lines, line));
  CHECK(nlohmann::json::parse(line).at("actions") ==
        nlohmann::json::array({"F", "L"}));
}

TEST_CASE("parse reports malformed lines with their line number") {
  ScratchDir dir{"cli-parse-bad"};
  write_file(dir.path / "routes.txt",
             "Depart from n1 to n2.\nthis is not a route\n");
  const CliResult result = run_cli(kCli, "parse routes.txt", dir.path);
  CHECK(result.exit_code == 2);
  CHECK(result.out.find("n1") != std::string::npos);  // good line still out
  CHECK(result.err.find(":2:") != std::string::npos);
}

TEST_CASE("parse handles an empty file as an empty success") {
  ScratchDir dir{"cli-parse-empty"};
  write_file(dir.path / "routes.txt", "");
  const CliResult result = run_cli(kCli, "parse routes.txt", dir.path);
  CHECK(result.exit_code == 0);
  CHECK(result.out.empty());
}

TEST_CASE("blocks mode joins blank-line separated instructions") {
  ScratchDir dir{"cli-parse-blocks"};
  write_file(dir.path / "routes.txt",
             "Depart from n1 to n2.\nThen, turn right and proceed to n3.\n"
             "\n"
             "Depart from a to b.\n");
  const CliResult result =
      run_cli(kCli, "parse routes.txt --blocks", dir.path);
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("\"n3\"") != std::string::npos);
  CHECK(result.out.find("\"b\"") != std::string::npos);
}

TEST_CASE("build then query reproduces the walkthrough answer") {
  ScratchDir dir{"cli-build"};
  write_file(dir.path / "routes.txt", kToyInstructions);
  const CliResult build =
      run_cli(kCli, "build routes.txt -o map.json", dir.path);
  REQUIRE(build.exit_code == 0);

  const CliResult query = run_cli(kCli, "query map.json n5 n3", dir.path);
  CHECK(query.exit_code == 0);
  CHECK(query.out ==
        "Depart from n5 to n4. Then, turn right and proceed to n2. Then, "
        "turn left and proceed to n3.\n");

  // machine output on stdout only
  CHECK(query.err.empty());
}

TEST_CASE("rebuilding writes a byte-identical map file") {
  ScratchDir dir{"cli-rebuild"};
  write_file(dir.path / "routes.txt", kToyInstructions);
  REQUIRE(run_cli(kCli, "build routes.txt -o a.json", dir.path).exit_code ==
          0);
  REQUIRE(run_cli(kCli, "build routes.txt -o b.json", dir.path).exit_code ==
          0);
  CHECK(read_file(dir.path / "a.json") == read_file(dir.path / "b.json"));
}

TEST_CASE("conflicting instructions abort the build naming the node") {
  ScratchDir dir{"cli-conflict"};
  write_file(dir.path / "routes.txt",
             "Depart from n1 to n2. Then, turn right and proceed to n3.\n"
             "Depart from n1 to n2. Then, turn left and proceed to n3.\n");
  const CliResult result =
      run_cli(kCli, "build routes.txt -o map.json", dir.path);
  CHECK(result.exit_code == 3);
  CHECK(result.err.find("n2") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir.path / "map.json"));
}

TEST_CASE("route failures map to distinct exit codes") {
  ScratchDir dir{"cli-codes"};
  write_file(dir.path / "routes.txt", kToyInstructions);
  write_file(dir.path / "split.txt",
             "Depart from a to b.\nDepart from c to d.\n");
  write_file(dir.path / "bare.txt",
             "Depart from a to b.\nDepart from b to c.\n");
  REQUIRE(run_cli(kCli, "build routes.txt -o toy.json", dir.path).exit_code ==
          0);
  REQUIRE(run_cli(kCli, "build split.txt -o split.json", dir.path)
              .exit_code == 0);
  REQUIRE(run_cli(kCli, "build bare.txt -o bare.json", dir.path).exit_code ==
          0);

  CHECK(run_cli(kCli, "query toy.json n5 n9", dir.path).exit_code == 4);
  CHECK(run_cli(kCli, "query split.json a d", dir.path).exit_code == 5);
  CHECK(run_cli(kCli, "query bare.json a c", dir.path).exit_code == 6);
  CHECK(run_cli(kCli, "query missing.json a b", dir.path).exit_code == 7);
  CHECK(run_cli(kCli, "query toy.json n5 N5", dir.path).exit_code == 1);
}

TEST_CASE("gen-env and sample are deterministic end to end") {
  ScratchDir dir{"cli-env"};
  REQUIRE(run_cli(kCli, "gen-env --seed 9 --nodes 12 -o e1.json", dir.path)
              .exit_code == 0);
  REQUIRE(run_cli(kCli, "gen-env --seed 9 --nodes 12 -o e2.json", dir.path)
              .exit_code == 0);
  CHECK(read_file(dir.path / "e1.json") == read_file(dir.path / "e2.json"));

  REQUIRE(run_cli(kCli, "sample e1.json --seed 3 -o d1.json", dir.path)
              .exit_code == 0);
  REQUIRE(run_cli(kCli, "sample e1.json --seed 3 -o d2.json", dir.path)
              .exit_code == 0);
  CHECK(read_file(dir.path / "d1.json") == read_file(dir.path / "d2.json"));

  const PathDataset dataset = load_dataset(dir.path / "d1.json");
  CHECK(dataset.items.size() == 10);
}

TEST_CASE("eval over files emits the JSON report") {
  ScratchDir dir{"cli-eval"};
  REQUIRE(run_cli(kCli, "gen-env --seed 5 --nodes 10 -o env.json", dir.path)
              .exit_code == 0);
  REQUIRE(run_cli(kCli, "sample env.json --seed 5 -o ds.json", dir.path)
              .exit_code == 0);
  const CliResult result = run_cli(
      kCli, "eval --task combined --env env.json --dataset ds.json --json",
      dir.path);
  REQUIRE(result.exit_code == 0);
  const nlohmann::json report = nlohmann::json::parse(result.out);
  CHECK(report.at("totals").at("attempted") == 10);
  CHECK(report.at("totals").at("succeeded_shortest") == 10);
  CHECK(report.at("backend") == "grammar");
}

TEST_CASE("implicit evaluation without any endpoint is a config error") {
  ScratchDir dir{"cli-implicit"};
  const CliResult result = run_cli(
      kCli, "eval --task reverse --method implicit --environments 1",
      dir.path);
  CHECK(result.exit_code == 1);
  CHECK(result.err.find("TEXTNAV_LLM") != std::string::npos);
}

TEST_CASE("the llm backend replays a recorded transcript offline") {
  // build the transcript with the same defaults the CLI uses, so the
  // replayed requests match byte for byte
  ::unsetenv("TEXTNAV_LLM_BASE_URL");
  ::unsetenv("TEXTNAV_LLM_MODEL");
  ::unsetenv("TEXTNAV_LLM_API_KEY");

  ScratchDir dir{"cli-replay"};
  const std::string instruction =
      "Depart from n1 to n2. Then, turn right and proceed to n3.";

  auto fake = std::make_shared<FakeChatTransport>();
  fake->responses = {
      tool_response({{"waypoints", {"n1", "n2", "n3"}},
                     {"turn_points", nlohmann::json::array()}}),
      tool_response({{"waypoints", {"n1", "n2", "n3"}},
                     {"turn_points", {"n2"}}})};
  auto transcript = std::make_shared<Transcript>();
  {
    auto client = std::make_shared<LlmClient>(
        LlmConfig{}, PromptSet{},
        std::make_shared<RecordingChatTransport>(fake, transcript));
    LlmExtractorBackend backend{client};
    const auto result = extract_canonical(instruction, backend);
    REQUIRE(std::holds_alternative<ExtractionSuccess>(result));
  }
  transcript->save(dir.path / "transcript.json");

  write_file(dir.path / "routes.txt", instruction + std::string("\n"));
  const CliResult result = run_cli(
      kCli,
      "parse routes.txt --backend llm --replay-transcript transcript.json",
      dir.path);
  REQUIRE(result.exit_code == 0);
  CHECK(nlohmann::json::parse(result.out) ==
        nlohmann::json{{"waypoints", {"n1", "n2", "n3"}},
                       {"actions", {"R"}}});
}

TEST_CASE("usage errors exit with the config code") {
  ScratchDir dir{"cli-usage"};
  CHECK(run_cli(kCli, "parse missing-file.txt", dir.path).exit_code == 7);
  CHECK(run_cli(kCli, "eval --env only-env.json", dir.path).exit_code != 0);
  CHECK(run_cli(kCli, "gen-env --nodes 3 --designated 5", dir.path)
            .exit_code == 1);
  CHECK(run_cli(kCli, "no-such-command", dir.path).exit_code != 0);
}
