#include "nearcrash/pipeline.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nearcrash/apriori.hpp"
#include "nearcrash/errors.hpp"
#include "nearcrash/itemize.hpp"
#include "nearcrash/report.hpp"
#include "nearcrash/textio.hpp"

namespace nearcrash {

namespace {

using nlohmann::ordered_json;

void emit_file(RunReport& report, const std::filesystem::path& out_dir,
               const std::string& name, const std::string& contents) {
  const std::filesystem::path path = out_dir / name;
  std::ofstream out = open_output(path);
  out << contents;
  out.close();
  report.outputs.push_back(OutputFile{name, path, fnv1a_hex(contents)});
}

ordered_json config_echo(const RunConfig& config) {
  ordered_json echo;
  ordered_json trajectory = ordered_json::array();
  for (const auto& path : config.trajectory) trajectory.push_back(path.string());
  echo["trajectory"] = trajectory;
  echo["segments"] = config.segments.string();
  echo["exclude_segments"] =
      config.exclude_segments ? ordered_json(config.exclude_segments->string())
                              : ordered_json(nullptr);
  echo["out_dir"] = config.out_dir.string();
  echo["min_support"] = config.mining.min_support;
  echo["min_confidence"] = config.mining.min_confidence;
  echo["minlen"] = config.mining.minlen;
  echo["maxlen"] = config.mining.maxlen;
  echo["class_feature"] = config.mining.class_feature;
  echo["top_k"] = config.top_k;
  echo["max_conflation_distance_m"] = config.max_conflation_distance_m;
  echo["peak_windows"] = config.peak_windows;
  echo["drop_unknown"] = config.drop_unknown;
  echo["dedup_gap_seconds"] = config.dedup_gap_seconds;
  return echo;
}

ordered_json report_json(const RunConfig& config, const RunReport& r) {
  ordered_json doc;
  doc["config"] = config_echo(config);

  ordered_json stages;
  stages["parse"] = {{"rows_read", r.parse.rows_read},
                     {"rows_malformed", r.parse.rows_malformed},
                     {"unmatched_target_rows", r.parse.unmatched_target_rows},
                     {"trips", r.trips},
                     {"records", r.records}};
  const FilterTally& f = r.extraction.filter;
  stages["filter"] = {{"trips_in", f.trips_in},
                      {"trips_short", f.trips_short},
                      {"records_in", f.records_in},
                      {"records_in_short_trips", f.records_in_short_trips},
                      {"cipv_excluded", f.cipv_excluded},
                      {"target_type_excluded", f.target_type_excluded},
                      {"range_excluded", f.range_excluded},
                      {"records_kept", f.records_kept}};
  stages["detect"] = {{"candidates", r.extraction.candidates}};
  stages["events"] = {{"events", r.extraction.events},
                      {"trivial", r.extraction.trivial_events},
                      {"non_trivial", r.extraction.non_trivial_events}};
  stages["segments"] = {{"features_read", r.segment_load.features_read},
                        {"invalid_geometry", r.segment_load.invalid_geometry},
                        {"missing_id", r.segment_load.missing_id},
                        {"loaded", r.segments_loaded},
                        {"excluded_ids", r.excluded_segment_ids}};
  stages["conflate"] = {{"events_in", r.conflation_input},
                        {"conflated", r.conflated},
                        {"rejected_distance", r.conflation_rejected}};
  stages["itemize"] = {{"transactions", r.transactions}};
  ordered_json by_consequent = ordered_json::object();
  for (const auto& [level, count] : r.rules_by_consequent) by_consequent[level] = count;
  stages["mine"] = {{"frequent_itemsets", r.frequent_itemsets},
                    {"rules", r.rules_total},
                    {"rules_by_consequent", by_consequent}};
  doc["stages"] = stages;

  ordered_json outputs = ordered_json::array();
  for (const OutputFile& f2 : r.outputs)
    outputs.push_back({{"file", f2.name}, {"digest", f2.digest}});
  doc["outputs"] = outputs;
  doc["warnings"] = r.warnings;
  return doc;
}

}  // namespace

RunReport run_pipeline(const RunConfig& config) {
  config.validate();
  const BinningScheme scheme = config.binning();
  const PeakWindows windows = PeakWindows::parse(config.peak_windows);
  std::filesystem::create_directories(config.out_dir);

  RunReport report;

  // Stage 1: trajectory ingestion and event extraction.
  ParseResult parsed = config.trajectory.size() == 2
                           ? parse_trajectory(config.trajectory[0], config.trajectory[1])
                           : parse_trajectory(config.trajectory[0]);
  report.parse = parsed.tally;
  report.trips = parsed.trips.size();
  for (const TripRecords& trip : parsed.trips) report.records += trip.records.size();

  ExtractionResult extraction =
      extract_events(std::move(parsed.trips), windows, config.dedup_gap_seconds);
  report.extraction = extraction.tally;

  // Stage 2: road segments and conflation.
  SegmentLoadResult segments = load_segments(config.segments);
  report.segment_load = segments.tally;
  report.segments_loaded = segments.segments.size();
  std::set<std::int64_t> excluded;
  if (config.exclude_segments) excluded = load_exclusion_list(*config.exclude_segments);
  report.excluded_segment_ids = excluded.size();

  SpatialIndex index = SpatialIndex::build(std::move(segments.segments));
  ConflationResult conflation =
      conflate(extraction.events, index, excluded, config.max_conflation_distance_m);
  report.conflation_input = extraction.events.size();
  report.conflated = conflation.conflated.size();
  report.conflation_rejected = conflation.rejected_distance;

  // Class levels drive the per-class artifact names; the scheme's known
  // levels keep the manifest stable even when a class is empty.
  std::vector<std::string> class_levels = scheme.level_order(config.mining.class_feature);

  if (conflation.conflated.empty()) {
    report.warnings.push_back(
        "no conflated events; reports are headers only and no rules were mined");
    const std::string empty_freq = "item\tcount\trelative_frequency\n";
    emit_file(report, config.out_dir, "item_frequency_all.tsv", empty_freq);
    for (const std::string& level : class_levels) {
      emit_file(report, config.out_dir,
                "item_frequency_" + sanitize_level(level) + ".tsv", empty_freq);
    }
    std::ostringstream levels_out;
    levels_out << "variable\tlevel\tcount\tpercentage\n";
    emit_file(report, config.out_dir, "feature_levels.tsv", levels_out.str());
    std::ostringstream rules_out;
    write_rule_table(rules_out, {}, config.mining.minlen, config.mining.maxlen);
    for (const std::string& level : class_levels) {
      emit_file(report, config.out_dir, "rules_" + sanitize_level(level) + ".tsv",
                rules_out.str());
    }
    std::ostringstream scatter_out;
    write_scatter_data(scatter_out, {});
    emit_file(report, config.out_dir, "rule_scatter.tsv", scatter_out.str());
    std::ostringstream summary_out;
    write_rule_summary(summary_out, {});
    emit_file(report, config.out_dir, "rule_summary.tsv", summary_out.str());
    emit_file(report, config.out_dir, "run_report.json",
              report_json(config, report).dump(2) + "\n");
    return report;
  }

  // Stage 3: itemization.
  BuiltDatabase built = build_database(conflation.conflated, scheme, config.drop_unknown);
  report.transactions = static_cast<std::size_t>(built.db.size());

  // Stage 4: mining and ranking.
  FrequentItemsetTable table =
      mine_frequent(built.db, config.mining.min_support, config.mining.maxlen);
  report.frequent_itemsets = table.total_itemsets();
  std::vector<AssociationRule> rules = generate_class_rules(table, built.db, config.mining);
  report.rules_total = rules.size();
  for (const std::string& level : class_levels) report.rules_by_consequent[level] = 0;
  for (const AssociationRule& rule : rules) ++report.rules_by_consequent[rule.consequent.level];

  // Stage 5: artifacts.
  std::ostringstream freq_all;
  write_item_frequencies(freq_all, built.db, std::nullopt);
  emit_file(report, config.out_dir, "item_frequency_all.tsv", freq_all.str());
  for (const std::string& level : class_levels) {
    std::ostringstream freq_scope;
    write_item_frequencies(freq_scope, built.db,
                           canonical_item(config.mining.class_feature, level));
    emit_file(report, config.out_dir, "item_frequency_" + sanitize_level(level) + ".tsv",
              freq_scope.str());
  }

  std::ostringstream levels_out;
  write_feature_levels(levels_out, built, scheme);
  emit_file(report, config.out_dir, "feature_levels.tsv", levels_out.str());

  for (const std::string& level : class_levels) {
    std::vector<AssociationRule> ranked =
        rank_rules(rules, RankKey::kLift, config.top_k,
                   canonical_item(config.mining.class_feature, level));
    std::ostringstream rules_out;
    write_rule_table(rules_out, ranked, config.mining.minlen, config.mining.maxlen);
    emit_file(report, config.out_dir, "rules_" + sanitize_level(level) + ".tsv",
              rules_out.str());
  }

  std::ostringstream scatter_out;
  write_scatter_data(scatter_out, rules);
  emit_file(report, config.out_dir, "rule_scatter.tsv", scatter_out.str());

  std::ostringstream summary_out;
  write_rule_summary(summary_out, summarize_rules(rules));
  emit_file(report, config.out_dir, "rule_summary.tsv", summary_out.str());

  emit_file(report, config.out_dir, "run_report.json",
            report_json(config, report).dump(2) + "\n");
  return report;
}

}  // namespace nearcrash
