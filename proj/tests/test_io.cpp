#include <doctest.h>

#include <cstring>
#include <fstream>

#include "asymkit/error.hpp"
#include "asymkit/io.hpp"
#include "asymkit/rng.hpp"
#include "test_util.hpp"

using namespace asymkit;
using namespace asymkit::io;

TEST_SUITE("io") {

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("format_double is shortest round trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.0) == "-2");
  CHECK(format_double(NAN) == "nan");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("write_atomic leaves no temp files") {
  test::TempDir dir;
  const auto p = dir.path() / "sub" / "x.txt";
  write_atomic(p, "hello");
  write_atomic(p, "world");
  CHECK(read_text(p) == "world");
  int n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path() / "sub")) ++n;
  CHECK(n == 1);
  CHECK_THROWS_AS(read_text(dir.path() / "nope"), IoError);
}

TEST_CASE("bold round trip is float32 exact") {
  test::TempDir dir;
  Rng rng(1);
  encoding::BoldRun run;
  run.data.resize(7, 5);
  for (auto& v : run.data.reshaped()) v = static_cast<float>(rng.normal());
  run.tr_seconds = 1.5;
  run.run_index = 3;
  const auto p = dir.path() / "b.f32";
  write_bold(p, run);
  CHECK(fs::file_size(p) == 7 * 5 * 4);
  const auto back = read_bold(p);
  CHECK(back.data == run.data);
  CHECK(back.tr_seconds == 1.5);
  CHECK(back.run_index == 3);

  // Row-major little-endian layout: the second float is element (0, 1).
  std::ifstream in(p, std::ios::binary);
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint32_t bits = bytes[4] | (bytes[5] << 8) | (bytes[6] << 16) | (static_cast<std::uint32_t>(bytes[7]) << 24);
  float f;
  std::memcpy(&f, &bits, 4);
  CHECK(f == static_cast<float>(run.data(0, 1)));
}

TEST_CASE("size mismatch against the sidecar is reported") {
  test::TempDir dir;
  encoding::BoldRun run{encoding::Matrix::Ones(4, 4), 2.0, 0};
  const auto p = dir.path() / "b.f32";
  write_bold(p, run);
  fs::resize_file(p, 20);
  CHECK_THROWS_AS(read_bold(p), ValidationError);
  fs::remove(sidecar_path(p));
  CHECK_THROWS_AS(read_bold(p), IoError);
}

TEST_CASE("features round trip with onsets") {
  test::TempDir dir;
  encoding::FeatureMatrix f;
  f.values = encoding::Matrix::Constant(3, 2, 0.5);
  f.onsets = {0.0, 1.25, 7.5};
  f.layer_index = 4;
  f.checkpoint_tokens = 123456789012;
  f.run_index = 2;
  const auto p = dir.path() / "feat" / "l4.f32";
  write_features(p, f);
  const auto back = read_features(p);
  CHECK(back.values == f.values);
  CHECK(back.onsets == f.onsets);
  CHECK(back.layer_index == 4);
  CHECK(back.checkpoint_tokens == 123456789012);
  CHECK(back.run_index == 2);
}

TEST_CASE("mask round trip and validation") {
  test::TempDir dir;
  encoding::RegionMask m{"cerebellum",
                         {encoding::Hemisphere::left, encoding::Hemisphere::other, encoding::Hemisphere::right}};
  write_mask(dir.path() / "m.json", m);
  const auto back = read_mask(dir.path() / "m.json");
  CHECK(back.name == "cerebellum");
  CHECK(back.labels == m.labels);
  write_atomic(dir.path() / "bad.json", R"({"name":"x","labels":["left","up"]})");
  CHECK_THROWS_AS(read_mask(dir.path() / "bad.json"), ValidationError);
}

TEST_CASE("trajectory CSV") {
  const auto ts = parse_trajectories("# note\ntokens,value,label\n1e9,0.1,a\n1e10,0.2,b\n1e11,0.3,a\n");
  REQUIRE(ts.size() == 2);
  CHECK(ts[0].label == "a");
  CHECK(ts[0].points.size() == 2);
  CHECK(ts[1].points[0].tokens == 1e10);
  const auto text = serialize_trajectories(ts, "config_hash=abc");
  CHECK(text.rfind("# config_hash=abc\n", 0) == 0);
  const auto again = parse_trajectories(text);
  CHECK(again[0].points[1].value == 0.3);
  CHECK_THROWS_AS(parse_trajectories("tokens,value\n1,2\n"), ValidationError);
  CHECK_THROWS_AS(parse_trajectories("tokens,value,label\n1,x,a\n"), ValidationError);
}

}  // TEST_SUITE
