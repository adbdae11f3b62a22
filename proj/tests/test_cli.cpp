#include "lowlight/cli.hpp"
#include "lowlight/synth.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>

#include "test_util.hpp"

using namespace lowlight;
using testutil::TempDir;

TEST_CASE("unknown subcommands and flags exit with code 2") {
  CHECK(run_cli({"frobnicate"}) == 2);
  CHECK(run_cli({"degrade", "--bogus-flag"}) == 2);
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"degrade"}) == 2);  // missing required options
}

TEST_CASE("--version and --help exit cleanly") {
  CHECK(run_cli({"--version"}) == 0);
  CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("degrade on an empty directory succeeds with an empty manifest") {
  TempDir in("cli-empty-in");
  TempDir out("cli-empty-out");
  CHECK(run_cli({"degrade", "--in", in.path.string(), "--out", out.path.string(), "--seed",
                 "3"}) == 0);
  std::ifstream mf(out.path / "manifest.json");
  REQUIRE(mf.good());
  const auto doc = nlohmann::json::parse(mf);
  CHECK(doc.at("entries").empty());
}

TEST_CASE("a bad config file exits with code 2") {
  TempDir tmp("cli-badcfg");
  std::ofstream(tmp.path / "bad.json") << "{\"nope\": 1}";
  TempDir in("cli-badcfg-in");
  TempDir out("cli-badcfg-out");
  CHECK(run_cli({"--config", (tmp.path / "bad.json").string(), "degrade", "--in",
                 in.path.string(), "--out", out.path.string(), "--seed", "3"}) == 2);
}

TEST_CASE("degrade then replay round trips through the CLI") {
  TempDir in("cli-flow-in");
  write_test_corpus(in.path, 4, 40, 30, 2024);
  TempDir out("cli-flow-out");

  CHECK(run_cli({"degrade", "--in", in.path.string(), "--out", out.path.string(), "--seed",
                 "11", "--jobs", "2"}) == 0);
  CHECK(std::filesystem::exists(out.path / "img_000.png"));
  CHECK(std::filesystem::exists(out.path / "img_000.deg.json"));
  CHECK(run_cli({"replay", "--src", in.path.string(), "--deg", out.path.string()}) == 0);

  // Replay under flags that change the pipeline refuses the hash.
  CHECK(run_cli({"baseline", "--method", "retinex", "--in", in.path.string(), "--out",
                 (out.path / "retinex").string(), "--seed", "11"}) == 0);
  CHECK(run_cli({"replay", "--src", in.path.string(), "--deg",
                 (out.path / "retinex").string()}) == 0);
}

TEST_CASE("degrade with pipeline flags stays replayable") {
  TempDir in("cli-flags-in");
  write_test_corpus(in.path, 3, 32, 24, 77);
  TempDir out("cli-flags-out");
  CHECK(run_cli({"degrade", "--in", in.path.string(), "--out", out.path.string(), "--seed",
                 "8", "--tone-remap", "--quant-mode", "bitdepth", "--ccm-mode", "mix"}) == 0);
  CHECK(run_cli({"replay", "--src", in.path.string(), "--deg", out.path.string()}) == 0);
}

TEST_CASE("missing input directory is a runtime failure, not a usage error") {
  TempDir out("cli-missing-out");
  CHECK(run_cli({"degrade", "--in", (out.path / "nope").string(), "--out",
                 (out.path / "o").string(), "--seed", "3"}) == 1);
}
