#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run rhplan(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = rh::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Fresh scratch directory removed at scope exit.
struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("rh_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("cli: version and help") {
  const Run v = rhplan({"version"});
  CHECK(v.code == 0);
  CHECK(v.out.rfind("rhplan ", 0) == 0);
  const Run h = rhplan({"--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("train") != std::string::npos);
}

TEST_CASE("cli: usage errors exit 1 with usage text") {
  const Run none = rhplan({});
  CHECK(none.code == 1);
  const Run train = rhplan({"train"});
  CHECK(train.code == 1);
  CHECK(train.err.find("--scenario") != std::string::npos);
  CHECK(train.err.find("Usage") != std::string::npos);
  CHECK(rhplan({"fly"}).code == 1);
  CHECK(rhplan({"synth", "--out", "x", "--count", "0"}).code == 1);
  CHECK(rhplan({"heatmap", "--scenario", "missing.rhscn"}).code == 1);
}

TEST_CASE("cli: bad input data exits 2") {
  Scratch tmp;
  const Run missing = rhplan({"replay", "--scenario", tmp / "missing.rhscn", "--out", tmp / "o.csv"});
  CHECK(missing.code == 2);
  CHECK(missing.err.rfind("rhplan: ", 0) == 0);
  std::ofstream(tmp / "bad.rhscn") << "not an archive\n";
  CHECK(rhplan({"replay", "--scenario", tmp / "bad.rhscn", "--out", tmp / "o.csv"}).code == 2);
  std::ofstream(tmp / "bad.cfg") << "[training]\nwarp = 9\n";
  REQUIRE(rhplan({"synth", "--out", tmp / "s.rhscn", "--seed", "1"}).code == 0);
  const Run cfg = rhplan({"replay", "--scenario", tmp / "s.rhscn", "--out", tmp / "o.csv", "--config", tmp / "bad.cfg"});
  CHECK(cfg.code == 2);
  CHECK(cfg.err.find("line 2") != std::string::npos);
  CHECK(rhplan({"replay", "--scenario", tmp / "s.rhscn", "--out", tmp / "o.csv", "--start-lane", "7"}).code == 2);
}

TEST_CASE("cli: synth, replay and evaluate are deterministic") {
  Scratch tmp;
  REQUIRE(rhplan({"synth", "--out", tmp / "s.rhscn", "--vehicles", "3", "--duration", "20", "--sign", "--seed", "4"}).code == 0);
  CHECK(fs::exists(tmp / "s.rhscn.manifest.json"));
  std::string first;
  for (int k = 0; k < 2; ++k) {
    const Run r = rhplan({"replay", "--scenario", tmp / "s.rhscn", "--out", tmp / "ego.csv", "--seed", "2"});
    REQUIRE(r.code == 0);
    const std::string csv = slurp(tmp / "ego.csv");
    CHECK(csv.rfind("step,t,x,y,heading,vx,vy,s,d,vs,vd\n", 0) == 0);
    CHECK(slurp(tmp / "ego.csv.robustness.csv").rfind("t,rule,value", 0) == 0);
    if (k == 0) first = csv;
    else CHECK(csv == first);
  }
  const Run e = rhplan({"evaluate", "--scenario", tmp / "s.rhscn", "--seed", "2"});
  REQUIRE(e.code == 0);
  const auto report = nlohmann::json::parse(e.out);
  CHECK(report["rules"].contains("R_G1"));
  CHECK(report["critic"].is_null());
}

TEST_CASE("cli: train, heatmap and RHPLAN_OUT_DIR") {
  Scratch tmp;
  REQUIRE(rhplan({"synth", "--out", tmp / "set", "--count", "2", "--vehicles", "2", "--duration", "20", "--sign"}).code == 0);
  const Run t = rhplan({"train", "--scenario", tmp / "set", "--out-dir", tmp / "run", "--steps", "300", "--seed", "1"});
  REQUIRE(t.code == 0);
  CHECK(t.err.find("round 1") != std::string::npos);
  for (const char* f : {"critic.rhnet", "critic.rhnet.json", "metrics.csv", "episodes.csv", "manifest.json"}) {
    CHECK(fs::exists(fs::path(tmp / "run") / f));
  }
  const auto manifest = nlohmann::json::parse(slurp(fs::path(tmp / "run") / "manifest.json"));
  CHECK(manifest["command"] == "train");
  CHECK(manifest["inputs"].size() == 2);

  ::setenv("RHPLAN_OUT_DIR", (tmp / "out").c_str(), 1);
  const Run h = rhplan({"heatmap", "--scenario", tmp / "set/scenario_000.rhscn", "--quantity", "value",
                        "--checkpoint", tmp / "run/critic.rhnet", "--csv", "grid.csv", "--svg", "grid.svg",
                        "--cell-long", "10"});
  ::unsetenv("RHPLAN_OUT_DIR");
  REQUIRE(h.code == 0);
  CHECK(fs::exists(tmp / "out/grid.csv"));
  CHECK(fs::exists(tmp / "out/grid.svg"));
  CHECK(fs::exists(tmp / "out/grid.csv.manifest.json"));
  CHECK(slurp(tmp / "out/grid.csv").find("quantity=value ") != std::string::npos);
  const Run no_ckpt = rhplan({"heatmap", "--scenario", tmp / "set/scenario_000.rhscn", "--quantity", "value",
                              "--csv", tmp / "g.csv"});
  CHECK(no_ckpt.code == 1);
}
