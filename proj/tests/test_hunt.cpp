#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "abcwb/hunt.hpp"

using namespace abcwb;

namespace {

HuntConfig small_config(long long hi) {
  HuntConfig cfg;
  cfg.curve = Curve::mordell(17);
  cfg.base_points = {CurvePoint::make(-2, 3), CurvePoint::make(2, 5)};
  cfg.n_range = {1, hi};
  cfg.m_range = {1, hi};
  return cfg;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("abcwb_" + name)).string();
}

TripleRecord fake_record(BigInt a, BigInt b, long double q, long long n, long long m, Sign s) {
  TripleRecord r(make_triple(std::move(a), std::move(b)), QualityReport{1, q, true, false});
  r.n = n;
  r.m = m;
  r.sign = s;
  return r;
}

}  // namespace

TEST(HuntConfig, Validation) {
  HuntConfig cfg = small_config(2);
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.cell_count(), 8U);

  HuntConfig one_point = cfg;
  one_point.base_points.pop_back();
  EXPECT_THROW(one_point.validate(), ValidationError);

  HuntConfig off_curve = cfg;
  off_curve.base_points[1] = CurvePoint::make(1, 1);
  EXPECT_THROW(off_curve.validate(), ValidationError);

  HuntConfig empty = cfg;
  empty.n_range = {3, 2};
  EXPECT_THROW(empty.validate(), ValidationError);

  HuntConfig no_signs = cfg;
  no_signs.signs.clear();
  EXPECT_THROW(no_signs.validate(), ValidationError);
}

TEST(HuntConfig, JsonParsing) {
  const auto j = nlohmann::json::parse(R"({"A": 0, "B": 17, "points": [[-2, 3], ["2", "5", "1"]],
      "nMin": 1, "nMax": 3, "mMin": 2, "mMax": 4, "signs": "+", "eps": 0.5, "seed": 9})");
  const HuntConfig cfg = hunt_config_from_json(j);
  EXPECT_EQ(cfg.curve.B(), 17);
  EXPECT_EQ(cfg.base_points[1], CurvePoint::make(2, 5));
  EXPECT_EQ(cfg.n_range.hi, 3);
  EXPECT_EQ(cfg.m_range.lo, 2);
  ASSERT_EQ(cfg.signs.size(), 1U);
  EXPECT_EQ(cfg.signs[0], Sign::plus);
  EXPECT_EQ(cfg.epsilon, 0.5L);
  EXPECT_EQ(cfg.effort.seed, 9U);

  const HuntConfig back = hunt_config_from_json(hunt_config_json(cfg));
  EXPECT_EQ(back.cell_count(), cfg.cell_count());
  EXPECT_EQ(back.base_points, cfg.base_points);

  EXPECT_THROW(hunt_config_from_json(nlohmann::json::parse("[]")), ValidationError);
  EXPECT_THROW(hunt_config_from_json(nlohmann::json::parse(R"({"A":0,"B":17,"points":[[1,1],[2,5]]})")),
               ValidationError);
  EXPECT_THROW(hunt_config_from_json(nlohmann::json::parse(
                   R"({"A":0,"B":17,"points":[[-2,3],[2,5]],"signs":"x"})")),
               ValidationError);
  EXPECT_THROW(hunt_config_from_json(nlohmann::json::parse(
                   R"({"A":0,"B":17.5,"points":[[-2,3],[2,5]]})")),
               ValidationError);
}

TEST(GridHunt, SmallGridRecords) {
  const HuntResult r = grid_hunt(small_config(2));
  ASSERT_EQ(r.records.size(), 8U);
  EXPECT_TRUE(r.skips.empty());
  for (const auto& rec : r.records) {
    EXPECT_TRUE(revalidate(rec));
    EXPECT_TRUE(rec.quality.certain);
    EXPECT_EQ(rec.curve_B, 17);
  }
  const TripleRecord& first = r.records.front();
  EXPECT_EQ(first.n, 1);
  EXPECT_EQ(first.m, 1);
  EXPECT_EQ(first.sign, Sign::plus);
  EXPECT_EQ(first.triple, AbcTriple::from_terms(1, 1088, 1089));
  EXPECT_EQ(first.raw_Z, -4);
  EXPECT_EQ(first.reduced_Z, 2);
  EXPECT_EQ(first.cancellation, 2);
  EXPECT_NEAR(static_cast<double>(first.quality.quality), 0.9957, 1e-4);
  EXPECT_NEAR(static_cast<double>(first.heuristic.gap), -0.0299, 1e-4);
}

TEST(GridHunt, EqualBasePointsSkipDiagonalDifferences) {
  HuntConfig cfg = small_config(3);
  cfg.base_points[1] = cfg.base_points[0];
  const HuntResult r = grid_hunt(cfg);
  ASSERT_EQ(r.skips.size(), 3U);
  for (const auto& s : r.skips) {
    EXPECT_EQ(s.n, s.m);
    EXPECT_EQ(s.sign, Sign::minus);
    EXPECT_EQ(s.reason, SkipReason::infinity);
  }
  EXPECT_EQ(r.records.size() + r.skips.size(), cfg.cell_count());
}

TEST(GridHunt, DigitCapSkips) {
  HuntConfig cfg = small_config(4);
  cfg.digit_cap = 6;
  const HuntResult r = grid_hunt(cfg);
  EXPECT_FALSE(r.skips.empty());
  EXPECT_EQ(r.records.size() + r.skips.size(), cfg.cell_count());
  for (const auto& s : r.skips) EXPECT_EQ(s.reason, SkipReason::digit_cap);
}

TEST(GridHunt, DeterministicAcrossJobCounts) {
  const HuntConfig cfg = small_config(4);
  const HuntResult one = grid_hunt(cfg, 1, 42);
  const HuntResult four = grid_hunt(cfg, 4, 42);
  ASSERT_EQ(one.records.size(), four.records.size());
  for (std::size_t i = 0; i < one.records.size(); ++i) {
    EXPECT_EQ(record_json(one.records[i]).dump(), record_json(four.records[i]).dump());
  }
}

TEST(GridHunt, SinkSeesEveryRecord) {
  std::size_t seen = 0;
  const HuntResult r = grid_hunt(small_config(3), 3, 0, [&](const TripleRecord&) { ++seen; });
  EXPECT_EQ(seen, r.records.size());
}

TEST(Leaderboard, OrdersByQualityThenTieBreaks) {
  std::vector<TripleRecord> store{
      fake_record(1, 8, 1.2L, 2, 1, Sign::plus),
      fake_record(2, 25, 0.9L, 1, 1, Sign::plus),
      fake_record(1, 80, 1.2L, 1, 1, Sign::plus),
      fake_record(1, 8, 1.2L, 1, 2, Sign::minus),
      fake_record(1, 8, 1.2L, 1, 2, Sign::plus),
  };
  const auto top = leaderboard(store, 10);
  ASSERT_EQ(top.size(), 5U);
  EXPECT_EQ(top[0].m, 2);
  EXPECT_EQ(top[0].sign, Sign::plus);
  EXPECT_EQ(top[1].sign, Sign::minus);
  EXPECT_EQ(top[2].n, 2);
  EXPECT_EQ(top[3].triple.c(), 81);
  EXPECT_EQ(top[4].quality.quality, 0.9L);

  EXPECT_EQ(leaderboard(store, 2).size(), 2U);
  EXPECT_TRUE(leaderboard({}, 3).empty());
}

TEST(Store, PersistLoadRoundTrip) {
  const std::string path = temp_path("roundtrip.jsonl");
  std::remove(path.c_str());
  const HuntResult r = grid_hunt(small_config(2), 1, 1234);
  {
    JsonlStore store(path);
    for (const auto& rec : r.records) store.persist(rec);
  }
  const auto loaded = load_store(path);
  ASSERT_EQ(loaded.size(), r.records.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    EXPECT_TRUE(same_record(loaded[i], r.records[i]));
    EXPECT_EQ(loaded[i].timestamp, 1234);
  }
  std::remove(path.c_str());
}

TEST(Store, RecordJsonFields) {
  const HuntResult r = grid_hunt(small_config(1));
  const auto j = record_json(r.records.front());
  for (const char* key : {"a", "b", "c", "rad", "quality", "certain", "curve_B", "n", "m", "sign",
                          "raw_Z", "reduced_Z", "cancellation", "timestamp", "point"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["a"], "1");
  EXPECT_EQ(j["sign"], "+");
}

TEST(Store, TruncatedLineReportsLineNumber) {
  const HuntResult r = grid_hunt(small_config(2));
  std::ostringstream text;
  text << record_json(r.records[0]).dump() << "\n";
  const std::string second = record_json(r.records[1]).dump();
  text << second.substr(0, second.size() / 2) << "\n";
  std::istringstream in(text.str());
  try {
    load_store(in);
    FAIL() << "expected StoreError";
  } catch (const StoreError& e) {
    EXPECT_EQ(e.line(), 2U);
  }
}

TEST(Store, TamperedRecordRejected) {
  const HuntResult r = grid_hunt(small_config(1));
  auto j = record_json(r.records.front());
  j["b"] = "1089";
  j["c"] = "1090";
  std::istringstream in(j.dump() + "\n");
  EXPECT_THROW(load_store(in), StoreError);
}

TEST(Store, EmptyFileIsEmptyStore) {
  std::istringstream in("");
  EXPECT_TRUE(load_store(in).empty());
  std::istringstream blank("\n");
  EXPECT_THROW(load_store(blank), StoreError);
  EXPECT_THROW(load_store(temp_path("does_not_exist.jsonl")), ValidationError);
}
