#include "evsup/io.hpp"
#include "evsup/suppression.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace {

using namespace evsup;

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("evsup_cli_" + tag);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EVSUP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("unknown flags are a usage error") {
    CHECK(run_cli("--definitely-not-a-flag") == 1);
    CHECK(run_cli("anticipate --no-such-option x") == 1);
  }

  TEST_CASE("missing input files are an io error") {
    TempDir dir("io_err");
    CHECK(run_cli("suppress --events " + dir.file("none.evs1") + " --mask " +
                  dir.file("none.pgm") + " --out " + dir.file("out.evs1")) == 2);
  }

  TEST_CASE("contract violations exit with code 3") {
    TempDir dir("contract");
    // geometry mismatch between mask and events
    EventStream s;
    s.width = 8;
    s.height = 8;
    s.events.push_back({1, 1, 10, 1});
    write_events_evs1(dir.file("e.evs1"), s);
    write_mask_pgm(dir.file("m.pgm"), IMOMask::zeros(4, 4));
    CHECK(run_cli("suppress --events " + dir.file("e.evs1") + " --mask " + dir.file("m.pgm") +
                  " --out " + dir.file("out.evs1")) == 3);
  }

  TEST_CASE("anticipate writes the warped thresholded mask") {
    TempDir dir("anticipate");
    IMOMask m = IMOMask::zeros(8, 8);
    m.values(3, 2) = 1;
    write_mask_pgm(dir.file("m.pgm"), m);
    write_flow_flo1(dir.file("f.flo1"), FlowField::constant(8, 8, 1, 0, 100000));
    CHECK(run_cli("anticipate --mask " + dir.file("m.pgm") + " --flow " + dir.file("f.flo1") +
                  " --dtp 100000 --out " + dir.file("m2.pgm")) == 0);
    const IMOMask out = read_mask_pgm(dir.file("m2.pgm"));
    CHECK(out.values(3, 3) == 1);
    CHECK(out.count() == 1);
  }

  TEST_CASE("synth is byte-deterministic for a fixed seed") {
    TempDir dir("synth_det");
    const std::string base = "synth --preset default --seed 9 --out-dir ";
    CHECK(run_cli(base + dir.file("a")) == 0);
    CHECK(run_cli(base + dir.file("b")) == 0);
    CHECK(slurp(dir.file("a") + "/events.evs1") == slurp(dir.file("b") + "/events.evs1"));
    CHECK(slurp(dir.file("a") + "/mask_100000.pgm") == slurp(dir.file("b") + "/mask_100000.pgm"));
    CHECK(slurp(dir.file("a") + "/flow_0.flo1") == slurp(dir.file("b") + "/flow_0.flo1"));
    CHECK(slurp(dir.file("a") + "/scene.json") == slurp(dir.file("b") + "/scene.json"));
  }

  TEST_CASE("encode and prune emit their declared outputs") {
    TempDir dir("encode");
    CHECK(run_cli("synth --preset single-edge --out-dir " + dir.file("scene")) == 0);
    CHECK(run_cli("encode --events " + dir.file("scene") + "/events.evs1 --bins 2 --t0 0 --t1 "
                  "50000 --out " + dir.file("v.vox1")) == 0);
    const VoxelGrid grid = read_voxel_vox1(dir.file("v.vox1"));
    CHECK(grid.bins == 2);
    CHECK(grid.width == 64);

    write_mask_pgm(dir.file("m.pgm"), read_mask_pgm(dir.file("scene") + "/mask_0.pgm"));
    CHECK(run_cli("prune --mask " + dir.file("m.pgm") + " --patch 8 --out " +
                  dir.file("tokens.json")) == 0);
    CHECK(std::filesystem::exists(dir.file("tokens.json")));
  }

  TEST_CASE("the full pipeline runs end to end on synthetic data") {
    TempDir dir("pipeline");
    const std::string scene = dir.file("scene");
    CHECK(run_cli("synth --preset default --seed 3 --out-dir " + scene) == 0);
    CHECK(run_cli("cmax --events " + scene + "/events.evs1 --tile 64 --t0 100000 --t1 200000 "
                  "--grid-range 8 --out " + dir.file("flow.flo1")) == 0);
    CHECK(run_cli("anticipate --mask " + scene + "/mask_200000.pgm --flow " +
                  dir.file("flow.flo1") + " --dtp 100000 --out " + dir.file("pred.pgm")) == 0);
    CHECK(run_cli("suppress --events " + scene + "/events.evs1 --mask " + dir.file("pred.pgm") +
                  " --keep imo --out " + dir.file("imo.evs1") + " --flags-out " +
                  dir.file("flags.csv")) == 0);
    CHECK(run_cli("metrics --pred " + dir.file("pred.pgm") + " --gt " + scene +
                  "/mask_300000.pgm --pred-flags " + dir.file("flags.csv") + " --gt-labels " +
                  scene + "/labels.csv --out " + dir.file("report.json")) == 0);
    CHECK(std::filesystem::exists(dir.file("report.json")));
    const EventStream kept = read_events_evs1(dir.file("imo.evs1"));
    CHECK(kept.size() > 0);
  }

  TEST_CASE("the env seed stands in for --seed") {
    TempDir dir("env_seed");
    CHECK(run_cli("synth --preset single-edge --seed 21 --out-dir " + dir.file("flagged")) == 0);
    const int status = std::system((std::string("EVSUP_SEED=21 ") + EVSUP_CLI_PATH +
                                    " synth --preset single-edge --out-dir " + dir.file("env") +
                                    " >/dev/null 2>&1")
                                       .c_str());
    REQUIRE(status != -1);
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(slurp(dir.file("flagged") + "/events.evs1") == slurp(dir.file("env") + "/events.evs1"));
  }

  TEST_CASE("csv event inputs are accepted") {
    TempDir dir("csv_in");
    EventStream s;
    s.width = 8;
    s.height = 8;
    s.events = {{1, 1, 10, 1}, {7, 7, 20, -1}};
    write_events_csv(dir.file("e.csv"), s);
    CHECK(run_cli("encode --events " + dir.file("e.csv") + " --bins 2 --t0 0 --t1 30") == 0);
  }

  TEST_CASE("losses reports the configured weights' total") {
    TempDir dir("losses");
    IMOMask gt = IMOMask::zeros(6, 6);
    gt.values(2, 2) = 1;
    write_mask_pgm(dir.file("gt.pgm"), gt);
    MaskLogits pred = to_logits(gt, 10.0);
    write_logits_mlg1(dir.file("pred.mlg1"), pred);
    CHECK(run_cli("losses --pred-logits " + dir.file("pred.mlg1") + " --gt-mask " +
                  dir.file("gt.pgm")) == 0);
  }
}
