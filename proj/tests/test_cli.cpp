#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "catch_amalgamated.hpp"

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "ymir_test_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(YMIR_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string path(const std::string& name) { return (kRoot / name).string(); }

const char* kProfile = R"({"length": 900, "metrics": 3, "period": 48,
  "counts": {"spike": 3, "phase": 2, "level_shift": 2, "spatial": 2, "restart": 2}})";

const char* kConfig = R"({"seed": 2, "period": 48,
  "detectors": [
    {"kind": "mediff"}, {"kind": "shesd"}, {"kind": "moving_average"}, {"kind": "chebyshev"},
    {"kind": "spectral_residual", "params": {"window": 32}},
    {"kind": "vae_recon", "params": {"window": 8, "hidden": 8, "latent": 2, "epochs": 2}},
    {"kind": "isolation_forest", "params": {"trees": 20}},
    {"kind": "lof", "params": {"neighbors": 10}}],
  "esd": {"window": 64},
  "classifier": {"window": 8, "d_model": 4, "channels": 2},
  "train": {"epochs": 2, "learning_rate": 0.01}})";

struct Workspace {
  Workspace() {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
    write(kRoot / "profile.json", kProfile);
    write(kRoot / "config.json", kConfig);
    REQUIRE(run("synth --profile " + path("profile.json") + " --seed 5 --out " + path("synth")) == 0);
    REQUIRE(run("train --data " + path("synth/data.csv") + " --labels " + path("synth/labels.csv") +
                " --config " + path("config.json") + " --out " + path("model")) == 0);
  }
};

const Workspace& workspace() {
  static const Workspace ws;
  return ws;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("detect --data x.csv") == 2);
  CHECK(run("detect --data x --model y --out z --mode sideways") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("train writes a manifest for each mode") {
  workspace();
  const auto manifest = nlohmann::json::parse(slurp(kRoot / "model/manifest.json"));
  CHECK(manifest.at("mode") == "supervised");
  CHECK(manifest.at("model_ids").size() == 8);
  CHECK(fs::exists(kRoot / "model/classifier.json"));

  REQUIRE(run("train --data " + path("synth/data.csv") + " --config " + path("config.json") + " --out " +
              path("unsup")) == 0);
  CHECK(nlohmann::json::parse(slurp(kRoot / "unsup/manifest.json")).at("mode") == "unsupervised");
  CHECK_FALSE(fs::exists(kRoot / "unsup/classifier.json"));
}

TEST_CASE("offline and stream detection write identical scores") {
  workspace();
  const std::string base = "detect --data " + path("synth/data.csv") + " --model " + path("model");
  REQUIRE(run(base + " --out " + path("off")) == 0);
  REQUIRE(run(base + " --out " + path("s100") + " --mode stream --batch 100") == 0);
  REQUIRE(run(base + " --out " + path("s1") + " --mode stream --batch 1") == 0);
  const auto offline = slurp(kRoot / "off/scores.csv");
  CHECK(offline.rfind("timestamp,mediff,shesd,moving_average,chebyshev,spectral_residual,vae_recon,"
                      "isolation_forest,lof,aggregate,classifier,flag\n",
                      0) == 0);
  CHECK(slurp(kRoot / "s100/scores.csv") == offline);
  CHECK(slurp(kRoot / "s1/scores.csv") == offline);
  CHECK(slurp(kRoot / "s1/result.json") == slurp(kRoot / "off/result.json"));
}

TEST_CASE("eval reports and is deterministic") {
  workspace();
  const std::string base = "detect --data " + path("synth/data.csv") + " --model " + path("model");
  REQUIRE(run(base + " --out " + path("ev")) == 0);
  const std::string eval = "eval --scores " + path("ev/scores.csv") + " --labels " + path("synth/labels.csv");
  REQUIRE(run(eval + " --out " + path("r1.json")) == 0);
  REQUIRE(run(eval + " --out " + path("r2.json")) == 0);
  CHECK(slurp(kRoot / "r1.json") == slurp(kRoot / "r2.json"));
  const auto report = nlohmann::json::parse(slurp(kRoot / "r1.json"));
  for (const char* key : {"best_f1", "threshold", "precision", "recall", "curve"}) CHECK(report.contains(key));
  CHECK(report.at("best_f1").get<double>() >= 0.0);
  CHECK(report.at("best_f1").get<double>() <= 1.0);

  // A scores file whose classifier column equals the truth scores 1.0.
  std::ifstream labels(kRoot / "synth/labels.csv");
  std::string line;
  std::getline(labels, line);
  std::ostringstream perfect;
  perfect << "timestamp,x,aggregate,classifier,flag\n";
  std::ostringstream sparse;
  sparse << "timestamp,label\n";
  int n = 0;
  while (std::getline(labels, line)) {
    const auto comma = line.find(',');
    perfect << line.substr(0, comma) << ",0,0," << line.substr(comma + 1) << ",0\n";
    if (n++ % 2 == 0) sparse << line << "\n";
  }
  write(kRoot / "perfect.csv", perfect.str());
  write(kRoot / "sparse.csv", sparse.str());
  REQUIRE(run("eval --scores " + path("perfect.csv") + " --labels " + path("synth/labels.csv") + " --out " +
              path("r3.json")) == 0);
  CHECK(nlohmann::json::parse(slurp(kRoot / "r3.json")).at("best_f1") == 1.0);
  CHECK(run("eval --scores " + path("perfect.csv") + " --labels " + path("sparse.csv") + " --out " +
            path("r4.json")) == 3);
}

TEST_CASE("data and manifest errors exit with 3") {
  workspace();
  CHECK(run("train --data " + path("missing.csv") + " --out " + path("m2")) == 3);
  write(kRoot / "foreign.csv", "timestamp,a,b,c\n0,1,2,3\n60,1,2,3\n");
  CHECK(run("detect --data " + path("foreign.csv") + " --model " + path("model") + " --out " + path("d2")) == 3);
  CHECK_FALSE(fs::exists(kRoot / "d2/scores.csv"));
  CHECK(run("detect --data " + path("synth/data.csv") + " --model " + path("nowhere") + " --out " + path("d3")) ==
        3);
}

TEST_CASE("bad configuration exits with 2") {
  workspace();
  write(kRoot / "bad.json", R"({"detectors": [{"kind": "nonexistent"}]})");
  CHECK(run("train --data " + path("synth/data.csv") + " --config " + path("bad.json") + " --out " +
            path("m3")) == 2);
  write(kRoot / "typo.json", R"({"sede": 3})");
  CHECK(run("train --data " + path("synth/data.csv") + " --config " + path("typo.json") + " --out " +
            path("m4")) == 2);
}

TEST_CASE("diverging training exits with 4") {
  workspace();
  auto cfg = nlohmann::json::parse(kConfig);
  cfg["train"]["learning_rate"] = 1e200;
  write(kRoot / "diverge.json", cfg.dump());
  CHECK(run("train --data " + path("synth/data.csv") + " --labels " + path("synth/labels.csv") + " --config " +
            path("diverge.json") + " --out " + path("m5")) == 4);
}

TEST_CASE("YMIR_SEED changes the seed") {
  workspace();
  const std::string train = "train --data " + path("synth/data.csv") + " --config " + path("config.json") +
                            " --unsupervised-only --out ";
  REQUIRE(::setenv("YMIR_SEED", "77", 1) == 0);
  REQUIRE(run(train + path("seeded")) == 0);
  ::unsetenv("YMIR_SEED");
  CHECK(nlohmann::json::parse(slurp(kRoot / "seeded/manifest.json")).at("config").at("seed") == 77);
}
