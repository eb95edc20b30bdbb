#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "capgym/core/action.hpp"
#include "capgym/core/base64.hpp"
#include "capgym/core/config.hpp"
#include "capgym/core/ground_truth.hpp"
#include "capgym/core/hash.hpp"
#include "capgym/core/parallel.hpp"
#include "capgym/core/rng.hpp"
#include "capgym/session/session.hpp"

using namespace capgym;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto p = std::filesystem::temp_directory_path() / ("capgym-core-" + name);
  std::ofstream(p) << content;
  return p;
}

// Hand-rolled generator for random actions.
Action random_action(Rng& rng) {
  const auto pt = [&] { return Point{rng.uniform_int(-50, 2000), rng.uniform_int(-50, 2000)}; };
  switch (rng.uniform_int(0, 3)) {
    case 0: return LeftClick{pt()};
    case 1: return Drag{pt(), pt()};
    case 2: {
      std::string s;
      const int n = rng.uniform_int(0, 12);
      for (int i = 0; i < n; ++i) s += static_cast<char>(rng.uniform_int(32, 126));
      if (rng.bernoulli(0.2)) s += "\b\n\"\\";
      return Type{s};
    }
    default: return Terminate{};
  }
}

}  // namespace

TEST(Rng, SameSeedAndStreamRepeat) {
  Rng a(42, "layout"), b(42, "layout");
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StreamsAreIndependent) {
  Rng a(42, "layout"), b(42, "style");
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a.next_u64() == b.next_u64();
  EXPECT_LE(same, 5);
}

TEST(Rng, DeriveIsDeterministicAndDistinct) {
  const Rng root(7, "root");
  auto x = root.derive("a"), y = root.derive("a"), z = root.derive("b");
  const auto vx = x.next_u64();
  EXPECT_EQ(vx, y.next_u64());
  EXPECT_NE(vx, z.next_u64());
}

TEST(Rng, UniformIntStaysInRange) {
  Rng r(1, "range");
  std::set<int> seen;
  for (int i = 0; i < 2000; ++i) {
    const int v = r.uniform_int(-3, 3);
    ASSERT_GE(v, -3);
    ASSERT_LE(v, 3);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
  EXPECT_EQ(r.uniform_int(5, 5), 5);
}

TEST(Rng, SampleIndicesAreDistinct) {
  Rng r(3, "sample");
  for (int trial = 0; trial < 50; ++trial) {
    const auto idx = r.sample_indices(20, 7);
    EXPECT_EQ(std::set<int>(idx.begin(), idx.end()).size(), 7u);
  }
}

TEST(Hash, Fnv1aKnownValues) {
  // Reference values of 64-bit FNV-1a.
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(to_hex(0xabcULL), "0000000000000abc");
}

TEST(Action, CanonicalEncodings) {
  EXPECT_EQ(Json(Action{LeftClick{{3, 4}}}).dump(), R"({"action":"left_click","coordinate":[3,4]})");
  EXPECT_EQ(Json(Action{Drag{{1, 2}, {3, 4}}}).dump(), R"({"action":"drag","end":[3,4],"start":[1,2]})");
  EXPECT_EQ(Json(Action{Type{"ab"}}).dump(), R"({"action":"type","text":"ab"})");
  EXPECT_EQ(Json(Action{Terminate{}}).dump(), R"({"action":"terminate"})");
}

TEST(Action, RoundTripProperty) {
  Rng rng(2024, "action-roundtrip");
  for (int i = 0; i < 500; ++i) {
    ActionBatch b;
    const int n = rng.uniform_int(1, 6);
    for (int k = 0; k < n; ++k) b.actions.push_back(random_action(rng));
    const auto text = Json(b).dump();
    EXPECT_EQ(parse_batch(text), b) << text;
  }
}

TEST(Action, RejectsMalformed) {
  EXPECT_THROW(parse_action(R"({"action":"hover","coordinate":[1,2]})"), ParseError);
  EXPECT_THROW(parse_action(R"({"action":"left_click"})"), ParseError);
  EXPECT_THROW(parse_action(R"({"action":"left_click","coordinate":[1]})"), ParseError);
  EXPECT_THROW(parse_action(R"({"action":"type","text":5})"), ParseError);
  EXPECT_THROW(parse_batch(R"([{"action":"terminate"}])"), ParseError);
  EXPECT_THROW(parse_batch("{not json"), ParseError);
}

TEST(GroundTruth, JsonRoundTrip) {
  GroundTruth g;
  g.answer_label = "cat";
  g.targets = {{Role::Tile, {1, 2, 3, 4}, 0}, {Role::SubmitButton, {5, 6, 7, 8}, -1}};
  g.target_tiles = {0, 4};
  g.goal_offset_px = 140;
  g.oracle_script = {{{LeftClick{{1, 1}}}}, {{Drag{{0, 0}, {9, 9}}, Terminate{}}}};
  EXPECT_EQ(Json(g).get<GroundTruth>(), g);
}

TEST(Config, DefaultBudgets) {
  const auto cfg = load_config(std::nullopt);
  const std::array<int, 7> expected = {5, 5, 5, 5, 8, 5, 8};
  for (auto t : kAllChallengeTypes) EXPECT_EQ(cfg.budget(t), expected[index_of(t)]) << to_string(t);
  EXPECT_EQ(cfg.budget(ChallengeType::ImageGrid), 8);
  EXPECT_EQ(cfg.budget(ChallengeType::Paged), 8);
  EXPECT_EQ(cfg.slider_tolerance_px, 6);
}

TEST(Config, ZeroToleranceIsRejected) {
  const auto p = temp_file("tol.json", R"({"slider_tolerance_px": 0})");
  try {
    load_config(p);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "slider_tolerance_px");
  }
}

TEST(Config, PartialOverrideKeepsDefaults) {
  const auto p = temp_file("canvas.json", R"({"canvas": {"slider": {"width": [400, 410], "height": [320, 330]}}})");
  const auto cfg = load_config(p);
  EnvConfig expected;
  expected.canvas[index_of(ChallengeType::Slider)] = {{400, 410}, {320, 330}};
  EXPECT_EQ(to_json_document(cfg), to_json_document(expected));
  EXPECT_NE(config_hash(cfg), config_hash(EnvConfig{}));
}

TEST(Config, UnknownKeysAndBadRangesFail) {
  EXPECT_THROW(apply_overrides(EnvConfig{}, Json{{"no_such_key", 1}}), ConfigError);
  EXPECT_THROW(apply_overrides(EnvConfig{}, Json{{"text_length", {6, 4}}}), ConfigError);
  EXPECT_THROW(apply_overrides(EnvConfig{}, Json{{"budgets", {{"text", 0}}}}), ConfigError);
  EXPECT_THROW(load_config(std::filesystem::path("/nonexistent/capgym.json")), ConfigError);
}

TEST(Config, HashIgnoresSecretsAndPaths) {
  EnvConfig a, b;
  b.meta_token = "other";
  b.session_expiry_s = 5;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.text_length = {5, 5};
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_FALSE(to_json_document(a, false).contains("meta_token"));
}

TEST(Base64, RoundTripProperty) {
  Rng rng(9, "b64");
  for (int n = 0; n < 64; ++n) {
    std::vector<std::uint8_t> data(static_cast<std::size_t>(n));
    for (auto& b : data) b = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    EXPECT_EQ(base64_decode(base64_encode(data)), data);
  }
  EXPECT_EQ(base64_encode(std::vector<std::uint8_t>{'f', 'o', 'o', 'b'}), "Zm9vYg==");
  EXPECT_THROW(base64_decode("Zm9v!"), ParseError);
}

TEST(Parallel, EveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw Error("boom"); }), Error);
}
