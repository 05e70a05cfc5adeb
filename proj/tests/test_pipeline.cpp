#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "nearcrash/config.hpp"
#include "nearcrash/errors.hpp"
#include "nearcrash/pipeline.hpp"
#include "nearcrash/textio.hpp"
#include "synthetic.hpp"

using namespace nearcrash;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("nearcrash_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& path, const std::string& contents) {
  std::ofstream out(path);
  out << contents;
}

// A tiny hand-written fixture: one trip, two hard brakes on segment 11.
constexpr const char* kMiniTrajectory =
    "Device\tTrip\tTime\tLatitudeWsu\tLongitudeWsu\tGpsSpeedWsu\tAxWsu\tCIPV\tRange\tTripStart\n"
    "D1\tT1\t0\t42.3000\t-83.6995\t12.0\t0.1\t1\t10.0\t2013-03-05 08:00:00\n"
    "D1\tT1\t6000\t42.3000\t-83.6990\t11.0\t-6.8\t1\t9.0\t\n"
    "D1\tT1\t12000\t42.3000\t-83.6985\t11.5\t0.2\t1\t8.0\t\n"
    "D1\tT1\t40000\t42.3000\t-83.6980\t13.0\t-9.0\t1\t7.0\t\n"
    "D1\tT1\t70000\t42.3000\t-83.6975\t12.0\t0.0\t1\t8.5\t\n";

constexpr const char* kMiniSegments = R"({
  "type": "FeatureCollection",
  "features": [
    {"type": "Feature",
     "geometry": {"type": "LineString", "coordinates": [[-83.70, 42.30], [-83.69, 42.30]]},
     "properties": {"segment_id": 11, "f_system": 4, "access_con": "3",
                    "shoulder_width": 0, "lane_width": 12, "median_type": 2,
                    "median_width": 40, "speed_limit": 45, "aadt": 25000}},
    {"type": "Feature",
     "geometry": {"type": "LineString", "coordinates": [[-83.70, 42.40], [-83.69, 42.40]]},
     "properties": {"segment_id": 12, "f_system": 1, "access_con": "1",
                    "shoulder_width": 10, "lane_width": 13, "median_type": 3,
                    "median_width": 50, "speed_limit": 65, "aadt": 60000}}
  ]})";

RunConfig mini_config(const TempDir& dir) {
  write_text(dir.path / "trips.tsv", kMiniTrajectory);
  write_text(dir.path / "segments.json", kMiniSegments);
  RunConfig config;
  config.trajectory = {dir.path / "trips.tsv"};
  config.segments = dir.path / "segments.json";
  config.out_dir = dir.path / "out";
  config.mining.min_support = 0.1;
  config.mining.min_confidence = 0.1;
  return config;
}

std::map<std::string, std::string> digests(const RunReport& report) {
  std::map<std::string, std::string> out;
  for (const OutputFile& f : report.outputs) out[f.name] = f.digest;
  return out;
}

}  // namespace

TEST_CASE("run_pipeline writes a stable manifest on the mini fixture") {
  TempDir dir("mini");
  RunConfig config = mini_config(dir);
  RunReport report = run_pipeline(config);

  CHECK(report.extraction.events == 2);  // two brakes, 340 s apart
  CHECK(report.extraction.trivial_events == 1);
  CHECK(report.extraction.non_trivial_events == 1);
  CHECK(report.conflated == 2);

  const std::vector<std::string> expected{
      "item_frequency_all.tsv",  "item_frequency_non_trivial.tsv",
      "item_frequency_trivial.tsv", "feature_levels.tsv",
      "rules_non_trivial.tsv",   "rules_trivial.tsv",
      "rule_scatter.tsv",        "rule_summary.tsv",
      "run_report.json"};
  REQUIRE(report.outputs.size() == expected.size());
  for (const std::string& name : expected) {
    bool found = false;
    for (const OutputFile& f : report.outputs) {
      if (f.name == name) {
        found = true;
        CHECK(fs::exists(f.path));
      }
    }
    CHECK_MESSAGE(found, name);
  }
}

TEST_CASE("run_pipeline is byte-deterministic across runs") {
  TempDir dir("determinism");
  RunConfig config = mini_config(dir);
  RunReport first = run_pipeline(config);
  std::map<std::string, std::string> snapshot;
  for (const OutputFile& f : first.outputs) snapshot[f.name] = read_file(f.path);

  RunReport second = run_pipeline(config);  // same config, same out_dir
  CHECK(digests(first) == digests(second));
  for (const OutputFile& f : second.outputs)
    CHECK(read_file(f.path) == snapshot.at(f.name));
}

TEST_CASE("a missing segment file is a configuration error before processing") {
  TempDir dir("missing");
  RunConfig config = mini_config(dir);
  config.segments = dir.path / "nope.json";
  CHECK_THROWS_AS(run_pipeline(config), ConfigError);
  CHECK_FALSE(fs::exists(config.out_dir));  // nothing was written

  config = mini_config(dir);
  config.trajectory = {dir.path / "nope.tsv"};
  CHECK_THROWS_AS(run_pipeline(config), ConfigError);

  config = mini_config(dir);
  config.mining.min_support = 2.0;
  CHECK_THROWS_AS(run_pipeline(config), ConfigError);

  config = mini_config(dir);
  config.mining.class_feature = "sev";  // pipeline transactions carry nv_severity
  CHECK_THROWS_AS(run_pipeline(config), ConfigError);
}

TEST_CASE("zero hard brakes still yields a complete, header-only report set") {
  TempDir dir("quiet");
  RunConfig config = mini_config(dir);
  std::string quiet =
      "Device\tTrip\tTime\tLatitudeWsu\tLongitudeWsu\tGpsSpeedWsu\tAxWsu\tCIPV\tRange\n"
      "D1\tT1\t0\t42.30\t-83.70\t10.0\t0.1\t1\t9.0\n"
      "D1\tT1\t70000\t42.30\t-83.70\t10.0\t-0.2\t1\t9.0\n";
  write_text(dir.path / "trips.tsv", quiet);
  RunReport report = run_pipeline(config);
  CHECK(report.extraction.events == 0);
  CHECK(report.rules_total == 0);
  REQUIRE(!report.warnings.empty());
  CHECK(report.outputs.size() == 9);
  std::string rules = read_file(config.out_dir / "rules_trivial.tsv");
  CHECK(rules.find("group\trule") == 0);
  CHECK(rules.find('\n') == rules.size() - 1);  // header only
}

TEST_CASE("funnel tallies reconcile on the synthetic corpus") {
  TempDir dir("funnel");
  auto corpus = nearcrash::testing::make_corpus(20240817);
  write_text(dir.path / "trips.tsv", corpus.trajectory_tsv);
  write_text(dir.path / "segments.json", corpus.segments_geojson);

  RunConfig config;
  config.trajectory = {dir.path / "trips.tsv"};
  config.segments = dir.path / "segments.json";
  config.out_dir = dir.path / "out";
  RunReport report = run_pipeline(config);

  CHECK(report.parse.rows_malformed == corpus.malformed_rows);
  const FilterTally& f = report.extraction.filter;
  CHECK(f.records_in == f.records_in_short_trips + f.cipv_excluded +
                            f.target_type_excluded + f.range_excluded + f.records_kept);
  CHECK(f.trips_short == 2);
  CHECK(report.extraction.events == corpus.planted_events);
  CHECK(report.conflation_rejected == corpus.far_events);
  CHECK(report.conflated == corpus.planted_events - corpus.far_events);
  CHECK(report.transactions == report.conflated);
  CHECK(report.rules_total > 0);

  // Scatter, rule tables and summary agree with each other.
  auto line_count = [](const fs::path& path) {
    std::istringstream in(read_file(path));
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) ++rows;
    return rows - 1;  // header
  };
  CHECK(line_count(config.out_dir / "rule_scatter.tsv") == report.rules_total);
  std::size_t summarized = 0;
  {
    std::istringstream in(read_file(config.out_dir / "rule_summary.tsv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      auto fields = split_line(line, '\t');
      summarized += static_cast<std::size_t>(*parse_int(fields[1]));
    }
  }
  CHECK(summarized == report.rules_total);
  std::size_t by_class = 0;
  for (const auto& [level, count] : report.rules_by_consequent) by_class += count;
  CHECK(by_class == report.rules_total);
}

TEST_CASE("config file, environment and overrides compose in order") {
  TempDir dir("config");
  write_text(dir.path / "config.json", R"({
    "min_support": 0.25,
    "minlen": 3,
    "top_k": 10,
    "peak_windows": "06:00-08:00",
    "bins": {"speed": {"breaks": [40], "labels": ["slow", "fast"]}}
  })");
  RunConfig config = load_run_config(dir.path / "config.json");
  CHECK(config.mining.min_support == doctest::Approx(0.25));
  CHECK(config.top_k == 10);
  CHECK(config.peak_windows == "06:00-08:00");
  BinningScheme scheme = config.binning();
  CHECK(scheme.bin_value("speed", 50.0).level == "fast");

  ::setenv("NEARCRASH_MIN_SUPPORT", "0.4", 1);
  ::setenv("NEARCRASH_TOP_K", "7", 1);
  apply_env_overrides(config);
  ::unsetenv("NEARCRASH_MIN_SUPPORT");
  ::unsetenv("NEARCRASH_TOP_K");
  CHECK(config.mining.min_support == doctest::Approx(0.4));
  CHECK(config.top_k == 7);
}

TEST_CASE("config files with unknown keys or bad json are rejected") {
  TempDir dir("badconfig");
  write_text(dir.path / "bad.json", R"({"min_supprt": 0.2})");
  CHECK_THROWS_AS(load_run_config(dir.path / "bad.json"), ConfigError);
  write_text(dir.path / "broken.json", "{");
  CHECK_THROWS_AS(load_run_config(dir.path / "broken.json"), ConfigError);
  CHECK_THROWS_AS(load_run_config(dir.path / "absent.json"), ConfigError);
}
