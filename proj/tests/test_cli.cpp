#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "defuse/cli.hpp"
#include "defuse/error.hpp"

using namespace defuse;

namespace {

struct Outcome {
  int status;
  std::string out, err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int rc = main_entry(args, out, err);
  return {rc, out.str(), err.str()};
}

ErrorKind parse_kind(const std::vector<std::string>& args) {
  try {
    parse_args(args);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::invalid_argument;
}

std::filesystem::path scratch(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("study flags") {
  const RunConfig c = parse_args({"study", "--problem", "ex4_1", "--grids", "10,20,40,80,160",
                                  "--tau-minus", "1e12", "--tau-plus", "1", "--seed", "0"});
  CHECK(c.command == "study");
  CHECK(c.grids == std::vector<int>{10, 20, 40, 80, 160});
  CHECK(c.params.at("tau_minus") == 1e12);
  CHECK(c.params.at("tau_plus") == 1.0);
  CHECK(c.seed == 0);
}

TEST_CASE("single solve flags") {
  const RunConfig c = parse_args({"solve", "--problem", "ex4_3", "--n", "80", "--seed", "7", "--out", "r/"});
  CHECK(c.command == "solve");
  CHECK(c.n == 80);
  CHECK(c.seed == 7);
  CHECK(c.out_dir == "r/");
  const TrainConfig t = c.train_config(2);
  CHECK(t.epochs == TrainConfig::defaults_for(2).epochs);
}

TEST_CASE("training overrides") {
  const RunConfig c = parse_args({"train", "--problem", "ex4_1", "--n", "10", "--epochs", "12",
                                  "--lr", "0.01", "--optimizer", "sgd", "--weights", "1,2,3,4",
                                  "--format", "md", "--band-width", "2"});
  const TrainConfig t = c.train_config(1);
  CHECK(t.epochs == 12);
  CHECK(t.learning_rate == 0.01);
  CHECK(t.optimizer == OptimizerKind::sgd);
  CHECK_FALSE(t.auto_weights);
  CHECK(t.weights.w3 == 3.0);
  CHECK(c.format == TableFormat::markdown);
  CHECK(c.band_width == 2);
  CHECK(parse_args({"train", "--problem", "ex4_1", "--n", "10", "--weights", "auto"}).train_config(1).auto_weights);
}

TEST_CASE("usage errors") {
  CHECK(parse_kind({"study", "--problem", "ex4_1", "--grids", "10"}) == ErrorKind::usage_error);
  CHECK(parse_kind({"study", "--problem", "ex4_1", "--grids", "10,30"}) == ErrorKind::usage_error);
  CHECK(parse_kind({"solve", "--problem", "ex4_3"}) == ErrorKind::usage_error);
  CHECK(parse_kind({"solve", "--problem", "ex4_3", "--n", "20", "--bogus"}) == ErrorKind::usage_error);
  CHECK(parse_kind({"frobnicate"}) == ErrorKind::usage_error);
  CHECK(parse_kind({"train", "--problem", "ex4_1", "--n", "10", "--optimizer", "rmsprop"}) ==
        ErrorKind::usage_error);
  CHECK(parse_kind({"train", "--problem", "ex4_1", "--n", "10", "--weights", "1,2"}) ==
        ErrorKind::usage_error);
  CHECK(parse_kind({}) == ErrorKind::usage_error);
  CHECK(invoke({"solve", "--n", "x"}).status == 2);
}

TEST_CASE("parse_args is total over odd inputs") {
  const std::vector<std::vector<std::string>> odd{
      {""}, {"--"}, {"-"}, {"study", "--grids", ",,,"}, {"solve", "--n", "-5", "--problem", "ex4_1"},
      {"study", "--grids", "10,20", "--n", "10", "--problem", "ex4_1"}, {"--seed", "-1"}};
  for (const auto& a : odd) {
    try {
      parse_args(a);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::usage_error);
    }
  }
}

TEST_CASE("config file with flag override") {
  const auto dir = scratch("defuse_cli_cfg");
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "run.cfg").string();
  {
    std::ofstream f(path);
    f << "# study setup\nproblem=ex4_2\ngrids=10,20,40\nseed=3\nepochs=99\n";
  }
  const RunConfig c = parse_args({"study", "--config", path, "--seed", "8"});
  CHECK(c.problem == "ex4_2");
  CHECK(c.grids.size() == 3);
  CHECK(c.seed == 8);
  CHECK(c.epochs == 99);
  {
    std::ofstream f(path);
    f << "problem=ex4_2\nnot_a_key=1\n";
  }
  CHECK(parse_kind({"inspect", "--config", path, "--n", "10"}) == ErrorKind::usage_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("list-problems prints the registry") {
  const Outcome o = invoke({"list-problems"});
  CHECK(o.status == 0);
  CHECK(std::count(o.out.begin(), o.out.end(), '\n') == 10);
  CHECK(o.out.find("ex4_11") != std::string::npos);
}

TEST_CASE("band covering the domain fails with the grid named") {
  const Outcome o = invoke({"solve", "--problem", "ex4_5", "--n", "10", "--oracle"});
  CHECK(o.status == 1);
  CHECK(o.err.find("BandCoversDomain") != std::string::npos);
  CHECK(o.err.find("grid 10") != std::string::npos);
}

TEST_CASE("unknown problem is a runtime failure") {
  CHECK(invoke({"inspect", "--problem", "nope", "--n", "10"}).status == 1);
}

TEST_CASE("inspect writes the region map") {
  const auto dir = scratch("defuse_cli_inspect");
  const Outcome o = invoke({"inspect", "--problem", "ex4_1", "--n", "10", "--out", dir.string()});
  CHECK(o.status == 0);
  CHECK(o.out.find("gamma_minus 1") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "regions.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("oracle solve and study write their artifacts") {
  const auto dir = scratch("defuse_cli_oracle");
  Outcome o = invoke({"solve", "--problem", "ex4_4", "--n", "20", "--oracle", "--out", dir.string()});
  CHECK(o.status == 0);
  CHECK(std::filesystem::exists(dir / "solution.csv"));
  CHECK(std::filesystem::exists(dir / "solution_minus.csv"));
  CHECK(std::filesystem::exists(dir / "solution_plus.csv"));

  o = invoke({"study", "--problem", "ex4_4", "--grids", "20,40", "--oracle", "--format", "md",
              "--out", dir.string()});
  CHECK(o.status == 0);
  CHECK(o.out.find("n=40") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "study.md"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("short training run writes networks and loss history") {
  const auto dir = scratch("defuse_cli_train");
  const Outcome o = invoke({"train", "--problem", "ex4_3", "--n", "20", "--epochs", "5", "--m1", "20",
                            "--m2", "20", "--layers", "2", "--width", "4", "--out", dir.string()});
  CHECK(o.status == 0);
  CHECK(std::filesystem::exists(dir / "net_minus.bin"));
  CHECK(std::filesystem::exists(dir / "net_plus.bin"));
  CHECK(std::filesystem::exists(dir / "loss.csv"));
  CHECK(std::filesystem::exists(dir / "config.txt"));

  const Outcome s = invoke({"solve", "--problem", "ex4_3", "--n", "20", "--load", dir.string()});
  CHECK(s.status == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("check-gradients reports and passes") {
  const Outcome o = invoke({"check-gradients", "--seed", "3", "--instances", "10"});
  CHECK(o.status == 0);
  CHECK(o.out.find("PASS") != std::string::npos);
}

}  // TEST_SUITE
