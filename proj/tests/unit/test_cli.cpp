#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "pulsediff/binary_io.hpp"

namespace fs = std::filesystem;
using pulsediff::io::read_file;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pulsediff_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run run(const std::string& args, const fs::path& cwd) {
  const auto out = cwd / "stdout.txt";
  const auto err = cwd / "stderr.txt";
  const std::string cmd = "cd '" + cwd.string() + "' && '" + PULSEDIFF_CLI + "' " + args + " > '" + out.string() +
                          "' 2> '" + err.string() + "'";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, read_file(out), read_file(err)};
}

const char* kTinyConfig = R"({
  "seed": 5,
  "synth": {"count": 20},
  "model": {"residual_blocks": 2, "channels": 8, "step_embed_dim": 16},
  "prior": {"k": 4},
  "train": {"epochs": 2, "batch_size": 8},
  "impute": {"n_samples": 2},
  "template": {"external_count": 5}
})";

void pipeline(const fs::path& dir) {
  pulsediff::io::write_file_atomic(dir / "cfg.json", kTinyConfig);
  for (const std::string step : {"synth --config cfg.json --out data", "mask --config cfg.json --data data",
                                 "template --config cfg.json --data data", "prior --config cfg.json --data data",
                                 "train --config cfg.json --data data --out model.pdm --trace loss.csv",
                                 "impute --config cfg.json --data data --model model.pdm",
                                 "eval --config cfg.json --data data --out report.csv"}) {
    const auto r = run(step, dir);
    INFO(step << "\n" << r.err);
    REQUIRE(r.status == 0);
    CHECK(r.err.empty());
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1);
  }
}

}  // namespace

TEST_CASE("help output matches the golden files") {
  const auto dir = scratch("help");
  for (const std::string cmd : {"main", "synth", "mask", "template", "prior", "train", "impute", "eval", "sweep",
                                "ablate"}) {
    const auto r = run(cmd == "main" ? "--help" : cmd + " --help", dir);
    INFO(cmd);
    CHECK(r.status == 0);
    CHECK(r.out == read_file(fs::path(GOLDEN_DIR) / ("help_" + cmd + ".txt")));
  }
  fs::remove_all(dir);
}

TEST_CASE("end-to-end pipeline emits a report") {
  const auto dir = scratch("e2e");
  pipeline(dir);
  for (const char* f : {"data/rec_0000.csv", "data/rec_0019.beats.csv", "data/rec_0000.masked.csv",
                        "data/external.template.csv", "data/rec_0000.template.csv", "data/rec_0000.detected.csv",
                        "data/rec_0000.prior.bin", "data/rec_0000.imputed.csv", "data/rec_0000.bands.csv", "loss.csv"})
    CHECK_MESSAGE(fs::exists(dir / f), f);
  const auto report = read_file(dir / "report.csv");
  CHECK(report.rfind("model,kind,pct,mse,f1,precision,sensitivity,n_recordings\nPulseDiff,transient,0.3,", 0) == 0);
  CHECK(report.find(",20\n") != std::string::npos);
  CHECK(read_file(dir / "loss.csv").rfind("step,epoch,loss,lr\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("pipeline is byte-for-byte reproducible") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  pipeline(a);
  pipeline(b);
  for (const char* f : {"model.pdm", "report.csv", "loss.csv", "data/rec_0007.imputed.csv", "data/rec_0007.prior.bin"})
    CHECK_MESSAGE(read_file(a / f) == read_file(b / f), f);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("configuration errors exit 1 and name the key") {
  const auto dir = scratch("config");
  auto r = run("synth --out d --set synth.colour=red", dir);
  CHECK(r.status == 1);
  CHECK(r.err == "ERROR config: unknown key 'synth.colour'\n");

  pulsediff::io::write_file_atomic(dir / "bad.json", R"({"train": {"epochs": 3, "momentum": 0.9}})");
  r = run("synth --config bad.json --out d", dir);
  CHECK(r.status == 1);
  CHECK(r.err == "ERROR config: unknown key 'train.momentum'\n");

  r = run("synth --out d --set synth.count=abc", dir);
  CHECK(r.status == 1);
  CHECK(r.err.rfind("ERROR config: key 'synth.count' expects a number", 0) == 0);

  r = run("synth --out d --set missingness.percentage=1.5", dir);
  CHECK(r.status == 1);
  CHECK(r.err.rfind("ERROR ", 0) == 0);

  r = run("mask", dir);
  CHECK(r.status == 1);
  CHECK(r.err.rfind("ERROR usage: ", 0) == 0);

  r = run("mask --data does_not_exist", dir);
  CHECK(r.status == 1);
  CHECK(r.err.rfind("ERROR invalid_argument: ", 0) == 0);
  CHECK(!fs::exists(dir / "d"));
  fs::remove_all(dir);
}

TEST_CASE("missing artifacts are runtime failures") {
  const auto dir = scratch("runtime");
  REQUIRE(run("synth --out data --set synth.count=2", dir).status == 0);
  const auto r = run("template --data data", dir);
  CHECK(r.status == 2);
  CHECK(r.err.rfind("ERROR io: ", 0) == 0);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  fs::remove_all(dir);
}

TEST_CASE("sweep and ablate reports") {
  const auto dir = scratch("sweep");
  pipeline(dir);
  auto r = run("sweep --config cfg.json --data data --out sweep --model model.pdm --set sweep.svg=true", dir);
  INFO(r.err);
  REQUIRE(r.status == 0);
  const auto report = read_file(dir / "sweep/report.csv");
  CHECK(std::count(report.begin(), report.end(), '\n') == 1 + 2 * 5 * 4);
  CHECK(read_file(dir / "sweep/plot_mse_transient.csv").rfind("pct,model,Template,Linear,ZeroFill\n", 0) == 0);
  CHECK(fs::exists(dir / "sweep/plot_f1_extended.svg"));

  r = run("ablate --config cfg.json --data data --out ablate --set train.epochs=1", dir);
  INFO(r.err);
  REQUIRE(r.status == 0);
  const auto ablate = read_file(dir / "ablate/report.csv");
  CHECK(std::count(ablate.begin(), ablate.end(), '\n') == 6);
  for (const char* label : {"\nbaseline,", "\nfixed-prior,", "\nfixed-prior+score,", "\naugmented,", "\naugmented+score,"})
    CHECK_MESSAGE(ablate.find(label) != std::string::npos, label);
  fs::remove_all(dir);
}
