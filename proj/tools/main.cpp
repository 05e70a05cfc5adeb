// nearcrash: detect near-crash events in naturalistic driving trajectories,
// attach road-inventory attributes by nearest-segment conflation, and mine
// class association rules over the encoded events.
//
// Subcommands: extract, conflate, mine, report, run (full pipeline).
// Exit codes: 0 success, 2 configuration error, 3 data error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nearcrash/apriori.hpp"
#include "nearcrash/config.hpp"
#include "nearcrash/errors.hpp"
#include "nearcrash/events.hpp"
#include "nearcrash/itemize.hpp"
#include "nearcrash/pipeline.hpp"
#include "nearcrash/report.hpp"
#include "nearcrash/spatial.hpp"
#include "nearcrash/textio.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct CliOptions {
  std::vector<std::string> trajectory;
  std::string segments;
  std::string exclude_segments;
  std::string events_file;  // stage input for conflate/mine/report
  std::string out_dir;
  std::string config_file;
  double min_support = -1.0;
  double min_confidence = -1.0;
  int minlen = -1;
  int maxlen = -1;
  int top_k = -1;
  double max_conflation_distance = -1.0;
  std::string peak_windows;
  bool drop_unknown = false;
  bool drop_unknown_set = false;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--config", opt.config_file, "JSON config file with run defaults");
  cmd->add_option("--out-dir", opt.out_dir, "Output directory");
}

void add_mining_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--min-support", opt.min_support, "Minimum itemset support (fraction)");
  cmd->add_option("--min-confidence", opt.min_confidence, "Minimum rule confidence");
  cmd->add_option("--minlen", opt.minlen, "Minimum rule length (antecedent + consequent)");
  cmd->add_option("--maxlen", opt.maxlen, "Maximum rule length");
  cmd->add_option("--top-k", opt.top_k, "Rules kept per consequent in the rule tables");
}

bool flag_given(const CLI::App* cmd, const std::string& name) {
  const CLI::Option* option = cmd->get_option_no_throw(name);
  return option && option->count() > 0;
}

// Precedence: built-in defaults < config file < NEARCRASH_* env < flags.
nearcrash::RunConfig assemble_config(const CliOptions& opt, const CLI::App* cmd) {
  nearcrash::RunConfig config;
  if (!opt.config_file.empty())
    config = nearcrash::load_run_config(opt.config_file, config);
  nearcrash::apply_env_overrides(config);

  if (flag_given(cmd, "--trajectory")) {
    config.trajectory.clear();
    for (const std::string& path : opt.trajectory) config.trajectory.push_back(path);
  }
  if (flag_given(cmd, "--segments")) config.segments = opt.segments;
  if (flag_given(cmd, "--exclude-segments")) config.exclude_segments = opt.exclude_segments;
  if (flag_given(cmd, "--out-dir")) config.out_dir = opt.out_dir;
  if (flag_given(cmd, "--min-support")) config.mining.min_support = opt.min_support;
  if (flag_given(cmd, "--min-confidence")) config.mining.min_confidence = opt.min_confidence;
  if (flag_given(cmd, "--minlen")) config.mining.minlen = opt.minlen;
  if (flag_given(cmd, "--maxlen")) config.mining.maxlen = opt.maxlen;
  if (flag_given(cmd, "--top-k")) config.top_k = opt.top_k;
  if (flag_given(cmd, "--max-conflation-distance"))
    config.max_conflation_distance_m = opt.max_conflation_distance;
  if (flag_given(cmd, "--peak-windows")) config.peak_windows = opt.peak_windows;
  if (opt.drop_unknown_set) config.drop_unknown = opt.drop_unknown;
  return config;
}

std::filesystem::path ensure_out_dir(const nearcrash::RunConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  return config.out_dir;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw nearcrash::ConfigError(message);
}

nearcrash::ParseResult parse_trajectory_input(const nearcrash::RunConfig& config) {
  require(!config.trajectory.empty(), "no trajectory input given (--trajectory)");
  require(config.trajectory.size() <= 2,
          "at most two trajectory files (state + front targets)");
  for (const auto& path : config.trajectory)
    require(std::filesystem::exists(path), "trajectory file not found: " + path.string());
  return config.trajectory.size() == 2
             ? nearcrash::parse_trajectory(config.trajectory[0], config.trajectory[1])
             : nearcrash::parse_trajectory(config.trajectory[0]);
}

int cmd_extract(const CliOptions& opt, const CLI::App* cmd) {
  nearcrash::RunConfig config = assemble_config(opt, cmd);
  nearcrash::PeakWindows windows = nearcrash::PeakWindows::parse(config.peak_windows);
  nearcrash::ParseResult parsed = parse_trajectory_input(config);
  nearcrash::ExtractionResult extraction = nearcrash::extract_events(
      std::move(parsed.trips), windows, config.dedup_gap_seconds);

  const std::filesystem::path out = ensure_out_dir(config) / "events.tsv";
  std::ofstream file = nearcrash::open_output(out);
  nearcrash::write_events_file(file, extraction.events);

  const auto& f = extraction.tally.filter;
  std::cout << "rows_read\t" << parsed.tally.rows_read << "\n"
            << "rows_malformed\t" << parsed.tally.rows_malformed << "\n"
            << "trips_in\t" << f.trips_in << "\n"
            << "trips_short\t" << f.trips_short << "\n"
            << "records_in\t" << f.records_in << "\n"
            << "records_in_short_trips\t" << f.records_in_short_trips << "\n"
            << "cipv_excluded\t" << f.cipv_excluded << "\n"
            << "target_type_excluded\t" << f.target_type_excluded << "\n"
            << "range_excluded\t" << f.range_excluded << "\n"
            << "records_kept\t" << f.records_kept << "\n"
            << "candidates\t" << extraction.tally.candidates << "\n"
            << "events\t" << extraction.tally.events << "\n"
            << "events_file\t" << out.string() << "\n";
  return kExitOk;
}

std::vector<nearcrash::NearCrashEvent> read_events(const std::string& path) {
  require(!path.empty(), "no events file given (--events)");
  require(std::filesystem::exists(path), "events file not found: " + path);
  std::ifstream in = nearcrash::open_input(path);
  return nearcrash::read_events_file(in);
}

std::vector<nearcrash::ConflatedEvent> read_conflated(const std::string& path) {
  require(!path.empty(), "no conflated events file given (--events)");
  require(std::filesystem::exists(path), "conflated events file not found: " + path);
  std::ifstream in = nearcrash::open_input(path);
  return nearcrash::read_conflated_file(in);
}

int cmd_conflate(const CliOptions& opt, const CLI::App* cmd) {
  nearcrash::RunConfig config = assemble_config(opt, cmd);
  require(!config.segments.empty(), "no segment file given (--segments)");
  require(std::filesystem::exists(config.segments),
          "segment file not found: " + config.segments.string());
  if (config.exclude_segments)
    require(std::filesystem::exists(*config.exclude_segments),
            "exclusion list not found: " + config.exclude_segments->string());

  std::vector<nearcrash::NearCrashEvent> events = read_events(opt.events_file);
  nearcrash::SegmentLoadResult segments = nearcrash::load_segments(config.segments);
  std::set<std::int64_t> excluded;
  if (config.exclude_segments)
    excluded = nearcrash::load_exclusion_list(*config.exclude_segments);

  nearcrash::SpatialIndex index = nearcrash::SpatialIndex::build(std::move(segments.segments));
  nearcrash::ConflationResult result = nearcrash::conflate(
      events, index, excluded, config.max_conflation_distance_m);

  const std::filesystem::path out = ensure_out_dir(config) / "conflated_events.tsv";
  std::ofstream file = nearcrash::open_output(out);
  nearcrash::write_conflated_file(file, result.conflated);

  std::cout << "features_read\t" << segments.tally.features_read << "\n"
            << "invalid_geometry\t" << segments.tally.invalid_geometry << "\n"
            << "missing_id\t" << segments.tally.missing_id << "\n"
            << "excluded_ids\t" << excluded.size() << "\n"
            << "events_in\t" << events.size() << "\n"
            << "conflated\t" << result.conflated.size() << "\n"
            << "rejected_distance\t" << result.rejected_distance << "\n"
            << "conflated_file\t" << out.string() << "\n";
  return kExitOk;
}

int cmd_mine(const CliOptions& opt, const CLI::App* cmd) {
  nearcrash::RunConfig config = assemble_config(opt, cmd);
  config.mining.validate();
  std::vector<nearcrash::ConflatedEvent> events = read_conflated(opt.events_file);
  nearcrash::BinningScheme scheme = config.binning();
  nearcrash::BuiltDatabase built =
      nearcrash::build_database(events, scheme, config.drop_unknown);

  nearcrash::FrequentItemsetTable table = nearcrash::mine_frequent(
      built.db, config.mining.min_support, config.mining.maxlen);
  std::vector<nearcrash::AssociationRule> rules =
      nearcrash::generate_class_rules(table, built.db, config.mining);

  const std::filesystem::path out_dir = ensure_out_dir(config);
  for (const std::string& level : scheme.level_order(config.mining.class_feature)) {
    auto ranked = nearcrash::rank_rules(
        rules, nearcrash::RankKey::kLift, config.top_k,
        nearcrash::canonical_item(config.mining.class_feature, level));
    std::ofstream file = nearcrash::open_output(
        out_dir / ("rules_" + nearcrash::sanitize_level(level) + ".tsv"));
    nearcrash::write_rule_table(file, ranked, config.mining.minlen, config.mining.maxlen);
  }
  {
    std::ofstream file = nearcrash::open_output(out_dir / "rule_scatter.tsv");
    nearcrash::write_scatter_data(file, rules);
  }
  {
    std::ofstream file = nearcrash::open_output(out_dir / "rule_summary.tsv");
    nearcrash::write_rule_summary(file, nearcrash::summarize_rules(rules));
  }

  std::cout << "transactions\t" << built.db.size() << "\n"
            << "frequent_itemsets\t" << table.total_itemsets() << "\n"
            << "rules\t" << rules.size() << "\n"
            << "out_dir\t" << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_report(const CliOptions& opt, const CLI::App* cmd) {
  nearcrash::RunConfig config = assemble_config(opt, cmd);
  std::vector<nearcrash::ConflatedEvent> events = read_conflated(opt.events_file);
  nearcrash::BinningScheme scheme = config.binning();
  nearcrash::BuiltDatabase built =
      nearcrash::build_database(events, scheme, config.drop_unknown);

  const std::filesystem::path out_dir = ensure_out_dir(config);
  {
    std::ofstream file = nearcrash::open_output(out_dir / "feature_levels.tsv");
    nearcrash::write_feature_levels(file, built, scheme);
  }
  {
    std::ofstream file = nearcrash::open_output(out_dir / "item_frequency_all.tsv");
    nearcrash::write_item_frequencies(file, built.db, std::nullopt);
  }
  for (const std::string& level : scheme.level_order(config.mining.class_feature)) {
    std::ofstream file = nearcrash::open_output(
        out_dir / ("item_frequency_" + nearcrash::sanitize_level(level) + ".tsv"));
    nearcrash::write_item_frequencies(
        file, built.db, nearcrash::canonical_item(config.mining.class_feature, level));
  }

  std::cout << "transactions\t" << built.db.size() << "\n"
            << "out_dir\t" << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_run(const CliOptions& opt, const CLI::App* cmd) {
  nearcrash::RunConfig config = assemble_config(opt, cmd);
  nearcrash::RunReport report = nearcrash::run_pipeline(config);
  std::cout << "events\t" << report.extraction.events << "\n"
            << "conflated\t" << report.conflated << "\n"
            << "transactions\t" << report.transactions << "\n"
            << "rules\t" << report.rules_total << "\n";
  for (const nearcrash::OutputFile& file : report.outputs)
    std::cout << "output\t" << file.path.string() << "\n";
  for (const std::string& warning : report.warnings)
    std::cerr << "warning: " << warning << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-crash event extraction, conflation and rule mining"};
  app.require_subcommand(1);

  CliOptions opt;

  CLI::App* extract = app.add_subcommand(
      "extract", "Detect near-crash events from trajectory records");
  extract->add_option("--trajectory", opt.trajectory,
                      "Trajectory file; pass twice for state + front-target streams")
      ->expected(1, 2);
  extract->add_option("--peak-windows", opt.peak_windows,
                      "Weekday peak windows, e.g. 07:00-09:00,16:00-18:00");
  add_common_flags(extract, opt);

  CLI::App* conflate = app.add_subcommand(
      "conflate", "Attach nearest road-segment attributes to extracted events");
  conflate->add_option("--events", opt.events_file, "events.tsv from extract");
  conflate->add_option("--segments", opt.segments, "Road segment GeoJSON file");
  conflate->add_option("--exclude-segments", opt.exclude_segments,
                       "Text file of segment ids to ignore");
  conflate->add_option("--max-conflation-distance", opt.max_conflation_distance,
                       "Reject events farther than this many meters");
  add_common_flags(conflate, opt);

  CLI::App* mine = app.add_subcommand(
      "mine", "Mine class association rules from conflated events");
  mine->add_option("--events", opt.events_file, "conflated_events.tsv from conflate");
  mine->add_flag("--drop-unknown", opt.drop_unknown,
                 "Drop items with level 'unknown' from transactions");
  add_mining_flags(mine, opt);
  add_common_flags(mine, opt);

  CLI::App* report = app.add_subcommand(
      "report", "Write item-frequency and level-count tables");
  report->add_option("--events", opt.events_file, "conflated_events.tsv from conflate");
  report->add_flag("--drop-unknown", opt.drop_unknown,
                   "Drop items with level 'unknown' from transactions");
  add_common_flags(report, opt);

  CLI::App* run = app.add_subcommand("run", "Full pipeline: extract through reports");
  run->add_option("--trajectory", opt.trajectory,
                  "Trajectory file; pass twice for state + front-target streams")
      ->expected(1, 2);
  run->add_option("--segments", opt.segments, "Road segment GeoJSON file");
  run->add_option("--exclude-segments", opt.exclude_segments,
                  "Text file of segment ids to ignore");
  run->add_option("--max-conflation-distance", opt.max_conflation_distance,
                  "Reject events farther than this many meters");
  run->add_option("--peak-windows", opt.peak_windows,
                  "Weekday peak windows, e.g. 07:00-09:00,16:00-18:00");
  run->add_flag("--drop-unknown", opt.drop_unknown,
                "Drop items with level 'unknown' from transactions");
  add_mining_flags(run, opt);
  add_common_flags(run, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    opt.drop_unknown_set = flag_given(active, "--drop-unknown");
    if (active == extract) return cmd_extract(opt, active);
    if (active == conflate) return cmd_conflate(opt, active);
    if (active == mine) return cmd_mine(opt, active);
    if (active == report) return cmd_report(opt, active);
    if (active == run) return cmd_run(opt, active);
    return kExitConfig;
  } catch (const nearcrash::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nearcrash::Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
