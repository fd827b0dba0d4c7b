#include "evsup/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace evsup;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("evsup_io_" + tag);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

EventStream random_stream(std::mt19937_64& rng, int n, int w, int h) {
  EventStream s;
  s.width = w;
  s.height = h;
  std::vector<std::int64_t> times(static_cast<std::size_t>(n));
  for (auto& t : times) t = static_cast<std::int64_t>(rng() % 100000);
  std::sort(times.begin(), times.end());
  for (int i = 0; i < n; ++i)
    s.events.push_back({static_cast<std::uint16_t>(rng() % w), static_cast<std::uint16_t>(rng() % h),
                        times[static_cast<std::size_t>(i)],
                        rng() % 2 ? std::int8_t(1) : std::int8_t(-1)});
  return s;
}

// f32-representable random value
Real random_f32(std::mt19937_64& rng, Real lo, Real hi) {
  return static_cast<float>(lo + (hi - lo) * (static_cast<Real>(rng() >> 11) * 0x1.0p-53));
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("evs1 round-trips a stream") {
    TempDir dir("evs1");
    std::mt19937_64 rng(91);
    EventStream s = random_stream(rng, 500, 40, 30);
    s.events.push_back({39, 29, 200000, 1});  // exercise the geometry corner
    write_events_evs1(dir.file("a.evs1"), s);
    const EventStream back = read_events_evs1(dir.file("a.evs1"));
    CHECK(back.width == 40);
    CHECK(back.height == 30);
    CHECK(back.events == s.events);
  }

  TEST_CASE("csv round-trips events") {
    TempDir dir("csv");
    std::mt19937_64 rng(92);
    EventStream s = random_stream(rng, 100, 16, 12);
    s.events.push_back({15, 11, 200000, -1});  // bounding box equals geometry
    write_events_csv(dir.file("a.csv"), s);
    const EventStream back = read_events_csv(dir.file("a.csv"));
    CHECK(back.events == s.events);
    CHECK(back.width == 16);
    CHECK(back.height == 12);
  }

  TEST_CASE("pgm round-trips masks") {
    TempDir dir("pgm");
    std::mt19937_64 rng(93);
    IMOMask m = IMOMask::zeros(9, 13);
    for (int i = 0; i < 30; ++i) m.values(rng() % 9, rng() % 13) = 1;
    write_mask_pgm(dir.file("m.pgm"), m);
    const IMOMask back = read_mask_pgm(dir.file("m.pgm"));
    CHECK((back.values == m.values).all());
  }

  TEST_CASE("mlg1 round-trips logits at f32 precision") {
    TempDir dir("mlg1");
    std::mt19937_64 rng(94);
    MaskLogits l;
    l.values.resize(7, 5);
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 5; ++x) l.values(y, x) = random_f32(rng, -12, 12);
    write_logits_mlg1(dir.file("l.mlg1"), l);
    const MaskLogits back = read_logits_mlg1(dir.file("l.mlg1"));
    CHECK((back.values == l.values).all());
  }

  TEST_CASE("flo1 round-trips flow and its reference duration") {
    TempDir dir("flo1");
    std::mt19937_64 rng(95);
    FlowField f;
    f.u.resize(6, 8);
    f.v.resize(6, 8);
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 8; ++x) {
        f.u(y, x) = random_f32(rng, -5, 5);
        f.v(y, x) = random_f32(rng, -5, 5);
      }
    f.dur_ref_us = 50000;
    write_flow_flo1(dir.file("f.flo1"), f);
    const FlowField back = read_flow_flo1(dir.file("f.flo1"));
    CHECK(back.dur_ref_us == 50000);
    CHECK((back.u == f.u).all());
    CHECK((back.v == f.v).all());
  }

  TEST_CASE("atc1 round-trips attention weights at f32 precision") {
    TempDir dir("atc1");
    AttentionWeights w = AttentionWeights::seeded(8, 2, 1234);
    // quantize to f32 so the round-trip is exact
    for (int h = 0; h < 2; ++h) {
      w.wq[h] = w.wq[h].cast<float>().cast<Real>();
      w.wk[h] = w.wk[h].cast<float>().cast<Real>();
      w.wv[h] = w.wv[h].cast<float>().cast<Real>();
    }
    w.wo = w.wo.cast<float>().cast<Real>();
    write_weights_atc1(dir.file("w.atc1"), w);
    const AttentionWeights back = read_weights_atc1(dir.file("w.atc1"));
    CHECK(back.channels == 8);
    CHECK(back.heads == 2);
    CHECK(back.seed == 1234);
    for (int h = 0; h < 2; ++h) {
      CHECK((back.wq[h].array() == w.wq[h].array()).all());
      CHECK((back.wk[h].array() == w.wk[h].array()).all());
      CHECK((back.wv[h].array() == w.wv[h].array()).all());
    }
    CHECK((back.wo.array() == w.wo.array()).all());
  }

  TEST_CASE("vox1 round-trips voxel grids") {
    TempDir dir("vox1");
    VoxelGrid g;
    g.bins = 2;
    g.height = 3;
    g.width = 4;
    g.t0 = 100;
    g.t1 = 900;
    g.data = {ImageR::Constant(3, 4, 1.5), ImageR::Constant(3, 4, -2.0)};
    write_voxel_vox1(dir.file("g.vox1"), g);
    const VoxelGrid back = read_voxel_vox1(dir.file("g.vox1"));
    CHECK(back.bins == 2);
    CHECK(back.t0 == 100);
    CHECK(back.t1 == 900);
    CHECK((back.data[0] == g.data[0]).all());
    CHECK((back.data[1] == g.data[1]).all());
  }

  TEST_CASE("labels csv round-trips flags") {
    TempDir dir("labels");
    const std::vector<std::uint8_t> labels{0, 1, 1, 0, 1};
    write_labels_csv(dir.file("l.csv"), labels);
    CHECK(read_labels_csv(dir.file("l.csv")) == labels);
  }

  TEST_CASE("malformed files are rejected") {
    TempDir dir("bad");
    CHECK_THROWS_AS(read_events_evs1(dir.file("missing.evs1")), FormatError);
    {
      std::ofstream out(dir.file("bad.evs1"), std::ios::binary);
      out << "NOPE";
    }
    CHECK_THROWS_AS(read_events_evs1(dir.file("bad.evs1")), FormatError);
    {
      std::ofstream out(dir.file("trunc.mlg1"), std::ios::binary);
      out << "MLG1";  // header cut short
    }
    CHECK_THROWS_AS(read_logits_mlg1(dir.file("trunc.mlg1")), FormatError);
    {
      std::ofstream out(dir.file("bad.pgm"), std::ios::binary);
      out << "P2\n2 2\n255\n0 0 0 0\n";
    }
    CHECK_THROWS_AS(read_mask_pgm(dir.file("bad.pgm")), FormatError);
  }
}
