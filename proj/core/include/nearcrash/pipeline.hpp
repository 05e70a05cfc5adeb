#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nearcrash/config.hpp"
#include "nearcrash/events.hpp"
#include "nearcrash/spatial.hpp"

namespace nearcrash {

struct OutputFile {
  std::string name;
  std::filesystem::path path;
  std::string digest;  // FNV-1a of the file bytes
};

/// Machine-readable account of one pipeline run: stage tallies that
/// reconcile (input = kept + excluded at every stage), the output manifest
/// with digests, and any warnings. Written as run_report.json; it carries
/// no timestamps, so reports from identical runs are identical.
struct RunReport {
  ParseTally parse;
  std::size_t trips = 0;
  std::size_t records = 0;
  ExtractionTally extraction;
  SegmentLoadTally segment_load;
  std::size_t segments_loaded = 0;
  std::size_t excluded_segment_ids = 0;
  std::size_t conflation_input = 0;
  std::size_t conflated = 0;
  std::size_t conflation_rejected = 0;
  std::size_t transactions = 0;
  std::size_t frequent_itemsets = 0;
  std::size_t rules_total = 0;
  std::map<std::string, std::size_t> rules_by_consequent;
  std::vector<OutputFile> outputs;
  std::vector<std::string> warnings;
};

/// Runs parse -> filter -> detect -> deduplicate -> classify -> conflate ->
/// itemize -> mine -> rank -> report and writes every artifact plus
/// run_report.json into config.out_dir. Throws ConfigError before touching
/// any data when the configuration is unusable; a run that extracts zero
/// events still writes header-only artifacts and records a warning.
RunReport run_pipeline(const RunConfig& config);

}  // namespace nearcrash
