#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "hdrpmp/io.hpp"

using namespace hdrpmp;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::temp_directory_path() / "hdrpmp_io" / (std::string(info->test_suite_name()) + "_" + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ErrorCode code_of(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::invalid_argument;
}

SimulatedScene small_scene(double s, bool quantize) {
  ExperimentConfig cfg;
  cfg.width = 48;
  cfg.height = 40;
  cfg.quantize = quantize;
  return simulate(cfg, s);
}

}  // namespace

TEST(Text, AngleParsing) {
  EXPECT_DOUBLE_EQ(io::parse_angle("5pi/2"), 5 * pi / 2);
  EXPECT_DOUBLE_EQ(io::parse_angle("-pi/6"), -pi / 6);
  EXPECT_DOUBLE_EQ(io::parse_angle(" 4*pi/5 "), 4 * pi / 5);
  EXPECT_DOUBLE_EQ(io::parse_angle("pi"), pi);
  EXPECT_DOUBLE_EQ(io::parse_angle("2.0943951023931953"), 2.0943951023931953);
  EXPECT_THROW(io::parse_angle("tau"), Error);
  EXPECT_THROW(io::parse_angle(""), Error);
  const auto list = io::parse_angle_list("5pi/2, -pi/6, 5pi/4, -4pi/5");
  ASSERT_EQ(list.size(), 4u);
  EXPECT_DOUBLE_EQ(list[3], -4 * pi / 5);
}

TEST(Text, DoublesRoundTripExactly) {
  const std::vector<double> v{pi, 1.0 / 3.0, -1e-300, 2.2, 6.02214076e23};
  const auto back = io::parse_angle_list(io::join_doubles(v));
  EXPECT_EQ(back, v);
}

TEST(KeyValue, ParseAndWrite) {
  std::istringstream in("# comment\nwidth = 64\n\nname=  peaks scene \nflag = true\n");
  const io::KeyValueFile kv = io::KeyValueFile::parse(in);
  EXPECT_EQ(kv.number("width"), 64.0);
  EXPECT_EQ(kv.require("name"), "peaks scene");
  EXPECT_TRUE(kv.flag("flag"));
  EXPECT_FALSE(kv.contains("missing"));
  EXPECT_THROW(kv.require("missing"), Error);
  std::istringstream bad("no equals sign here\n");
  EXPECT_THROW(io::KeyValueFile::parse(bad), Error);
}

TEST(KeyValue, ConfigRoundTrip) {
  ExperimentConfig cfg;
  cfg.width = 100;
  cfg.schedule = PhaseShiftSchedule{{5 * pi / 2, -pi / 6, 5 * pi / 4, -4 * pi / 5}};
  cfg.scale_factors = {1.5, 2.2};
  cfg.noise_variance = 20;
  cfg.seed = 18446744073709551615ull;
  cfg.methods = {Method::proposed};
  cfg.quantize = true;
  const fs::path dir = scratch();
  io::to_key_values(cfg).write(dir / "cfg.txt");
  const ExperimentConfig back = io::apply_key_values({}, io::KeyValueFile::read(dir / "cfg.txt"));
  EXPECT_EQ(back.width, 100u);
  EXPECT_EQ(back.schedule, cfg.schedule);
  EXPECT_EQ(back.scale_factors, cfg.scale_factors);
  EXPECT_EQ(back.noise_variance, 20.0);
  EXPECT_EQ(back.seed, cfg.seed);
  EXPECT_EQ(back.methods, cfg.methods);
  EXPECT_TRUE(back.quantize);
}

TEST(Pgm, EightAndSixteenBitRoundTrip) {
  const fs::path dir = scratch();
  Grid<double> g(7, 5);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i * 7 % 256);
  io::write_pgm(dir / "a.pgm", g);
  const io::GrayImage a = io::read_pgm(dir / "a.pgm");
  EXPECT_EQ(a.maxval, 255);
  EXPECT_TRUE(a.pixels == g);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i * 1000 % 65536);
  io::write_pgm(dir / "b.pgm", g, 65535);
  const io::GrayImage b = io::read_pgm(dir / "b.pgm");
  EXPECT_EQ(b.maxval, 65535);
  EXPECT_TRUE(b.pixels == g);
}

TEST(Pgm, MalformedIsLoadError) {
  const fs::path dir = scratch();
  std::ofstream(dir / "bad.pgm") << "P2\n2 2\n255\n0 0 0 0\n";
  EXPECT_EQ(code_of([&] { io::read_pgm(dir / "bad.pgm"); }), ErrorCode::load_error);
  std::ofstream(dir / "short.pgm", std::ios::binary) << "P5\n4 4\n255\nabc";
  EXPECT_EQ(code_of([&] { io::read_pgm(dir / "short.pgm"); }), ErrorCode::load_error);
}

TEST(Pfm, RoundTripIsBitExactForFloats) {
  const fs::path dir = scratch();
  Grid<double> g(9, 4);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(static_cast<float>(std::sin(i * 0.37) * 10.0));
  g[3] = std::numeric_limits<double>::quiet_NaN();
  io::write_pfm(dir / "a.pfm", g);
  const Grid<double> back = io::read_pfm(dir / "a.pfm");
  ASSERT_TRUE(back.same_shape(g));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i == 3)
      EXPECT_TRUE(std::isnan(back[i]));
    else
      EXPECT_EQ(back[i], g[i]);
  }
  EXPECT_EQ(slurp(dir / "a.pfm").substr(0, 3), "Pf\n");
}

TEST(PhaseMapFile, InvalidPixelsSurviveAsNaN) {
  const fs::path dir = scratch();
  PhaseMap m(4, 3);
  m.values[5] = 1.25;
  m.mask[7] = 0;
  io::save_phase_map(dir / "m.pfm", m);
  const PhaseMap back = io::load_phase_map(dir / "m.pfm");
  EXPECT_EQ(back.values[5], 1.25);
  EXPECT_EQ(back.mask[7], 0);
  EXPECT_EQ(back.valid_count(), 11u);
}

TEST(Stack, SaveLoadRoundTripWithThreshold) {
  const fs::path dir = scratch();
  const auto sc = small_scene(1.6, true);
  const fs::path manifest = io::save_stack(dir, sc.regular, sc.inverted, io::FrameFormat::pgm, 250.0);
  const auto [reg, inv] = io::load_stack(manifest);
  ASSERT_EQ(reg.count(), 3u);
  ASSERT_EQ(inv.count(), 3u);
  EXPECT_EQ(reg.kind, PatternKind::regular);
  EXPECT_EQ(inv.kind, PatternKind::inverted);
  EXPECT_EQ(reg.schedule, sc.regular.schedule);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_TRUE(reg.frames[k] == sc.regular.frames[k]);
    EXPECT_TRUE(inv.frames[k] == sc.inverted.frames[k]);
    for (std::size_t i = 0; i < reg.frames[k].size(); ++i) {
      ASSERT_EQ(reg.saturated[k][i] != 0, reg.frames[k][i] >= 250.0);
      ASSERT_EQ(inv.saturated[k][i] != 0, inv.frames[k][i] >= 250.0);
    }
  }
}

TEST(Stack, FloatFramesRoundTrip) {
  const fs::path dir = scratch();
  const auto sc = small_scene(1.3, false);
  const fs::path manifest = io::save_stack(dir, sc.regular, sc.inverted, io::FrameFormat::pfm, 255.0);
  const auto [reg, inv] = io::load_stack(manifest);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < reg.frames[k].size(); ++i) {
      EXPECT_EQ(reg.frames[k][i], static_cast<double>(static_cast<float>(sc.regular.frames[k][i])));
      EXPECT_EQ(reg.saturated[k][i], sc.regular.saturated[k][i]);
    }
}

TEST(Stack, FrameCountMismatch) {
  const fs::path dir = scratch();
  const auto sc = small_scene(1.0, true);
  io::save_stack(dir, sc.regular, sc.inverted, io::FrameFormat::pgm, 250.0);
  std::ofstream(dir / "two.txt") << "steps = 0, 2pi/3, 4pi/3\nregular = regular_0.pgm, regular_1.pgm\n"
                                    "inverted = inverted_0.pgm, inverted_1.pgm, inverted_2.pgm\n";
  std::string msg;
  EXPECT_EQ(code_of([&] { io::load_stack(dir / "two.txt"); }, &msg), ErrorCode::load_error);
  EXPECT_NE(msg.find("2 frames"), std::string::npos) << msg;
}

TEST(Stack, SixteenBitFrameInEightBitManifest) {
  const fs::path dir = scratch();
  const auto sc = small_scene(1.0, true);
  io::save_stack(dir, sc.regular, sc.inverted, io::FrameFormat::pgm, 250.0);
  io::write_pgm(dir / "regular_1.pgm", Grid<double>(48, 40, 1000.0), 65535);
  std::string msg;
  EXPECT_EQ(code_of([&] { io::load_stack(dir / "stack.txt"); }, &msg), ErrorCode::load_error);
  EXPECT_NE(msg.find("regular_1.pgm"), std::string::npos) << msg;
}

TEST(Stack, MissingAndMismatchedFramesNameTheFile) {
  const fs::path dir = scratch();
  const auto sc = small_scene(1.0, true);
  io::save_stack(dir, sc.regular, sc.inverted, io::FrameFormat::pgm, 250.0);
  io::write_pgm(dir / "inverted_2.pgm", Grid<double>(10, 10, 3.0));
  std::string msg;
  EXPECT_EQ(code_of([&] { io::load_stack(dir / "stack.txt"); }, &msg), ErrorCode::load_error);
  EXPECT_NE(msg.find("inverted_2.pgm"), std::string::npos) << msg;
  fs::remove(dir / "inverted_2.pgm");
  EXPECT_EQ(code_of([&] { io::load_stack(dir / "stack.txt"); }, &msg), ErrorCode::load_error);
  EXPECT_NE(msg.find("inverted_2.pgm"), std::string::npos) << msg;
}

TEST(Maps, SaveLoadIsStable) {
  const fs::path dir = scratch();
  const auto sc = small_scene(1.8, false);
  const RetrievalResult r = retrieve_proposed(sc.regular, sc.inverted);
  io::save_maps(dir / "a", r);
  const RetrievalResult back = io::load_maps(dir / "a");
  EXPECT_EQ(back.method, "proposed");
  for (std::size_t i = 0; i < r.wrapped.size(); ++i) {
    EXPECT_EQ(back.wrapped.values[i], static_cast<double>(static_cast<float>(r.wrapped.values[i])));
    EXPECT_EQ(back.reason[i], r.reason[i]);
    EXPECT_EQ(back.samples_used[i], r.samples_used[i]);
  }
  // A second save of the loaded maps reproduces the files byte for byte.
  io::save_maps(dir / "b", back);
  for (const char* f : {"wrapped_phase.pfm", "background.pfm", "modulation.pfm", "reason.pgm", "samples_used.pgm", "maps.txt"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
}

TEST(Maps, EmptyValidMaskStillWritten) {
  const fs::path dir = scratch();
  RetrievalResult r("proposed", 5, 4);
  for (auto& m : r.wrapped.mask) m = 0;
  for (auto& c : r.reason) c = InvalidReason::too_few_samples;
  io::save_maps(dir, r);
  EXPECT_TRUE(fs::exists(dir / "wrapped_phase.pfm"));
  const io::KeyValueFile kv = io::KeyValueFile::read(dir / "maps.txt");
  EXPECT_EQ(kv.number("valid_pixels"), 0.0);
  EXPECT_EQ(kv.number("too_few_samples"), 20.0);
}

TEST(Maps, ModulationMatchesScaleAtUnitScale) {
  const fs::path dir = scratch();
  const auto sc = small_scene(1.0, false);
  io::save_maps(dir, retrieve_proposed(sc.regular, sc.inverted));
  const RetrievalResult back = io::load_maps(dir);
  ASSERT_EQ(back.wrapped.valid_count(), back.wrapped.size());
  for (double b : back.modulation) EXPECT_NEAR(b, 127.5, 1e-4);
}

TEST(Table, LongFormatWithConfigEcho) {
  const fs::path dir = scratch();
  ExperimentConfig cfg;
  cfg.width = cfg.height = 32;
  cfg.scale_factors = {1.0, 2.2};
  cfg.seed = 7;
  io::write_table(dir / "t.csv", run_table1(cfg));
  std::ifstream in(dir / "t.csv");
  std::string line;
  std::vector<std::string> comments, rows;
  while (std::getline(in, line)) (line.rfind("#", 0) == 0 ? comments : rows).push_back(line);
  ASSERT_EQ(rows.size(), 1u + 2u * 3u);
  EXPECT_EQ(rows[0], "scale_factor,method,rmse_rad,compared_pixels,invalid_pixels,note");
  EXPECT_EQ(rows[1].rfind("1,conventional,", 0), 0u);
  bool seed_echoed = false;
  for (const auto& c : comments) seed_echoed |= c == "# seed = 7";
  EXPECT_TRUE(seed_echoed);
}
