#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nearcrash/itemize.hpp"
#include "nearcrash/model.hpp"

namespace nearcrash {

/// Everything a pipeline run needs. Defaults encode the standard thresholds;
/// a JSON config file can replace them, NEARCRASH_* environment variables
/// override the file, and command-line flags override both.
struct RunConfig {
  std::vector<std::filesystem::path> trajectory;  // 1 joined file, or state + front targets
  std::filesystem::path segments;
  std::optional<std::filesystem::path> exclude_segments;
  std::filesystem::path out_dir = "out";

  MiningParams mining;
  int top_k = 25;
  double max_conflation_distance_m = 100.0;
  std::string peak_windows = "07:00-09:00,16:00-18:00";
  bool drop_unknown = false;
  double dedup_gap_seconds = 180.0;
  std::map<std::string, BinningScheme::IntervalFeature> bin_overrides;

  /// Default scheme with the config's overrides applied.
  BinningScheme binning() const;

  /// Throws ConfigError when inputs are missing or parameters are invalid.
  /// Runs before any data is touched.
  void validate() const;
};

/// Reads a JSON config file over the given defaults. Unknown keys are
/// rejected. Throws ConfigError.
RunConfig load_run_config(const std::filesystem::path& path,
                          const RunConfig& defaults = {});

/// Applies NEARCRASH_* environment variables (for CI use): MIN_SUPPORT,
/// MIN_CONFIDENCE, MINLEN, MAXLEN, TOP_K, MAX_CONFLATION_DISTANCE,
/// PEAK_WINDOWS, DROP_UNKNOWN, OUT_DIR, TRAJECTORY (comma-separated),
/// SEGMENTS, EXCLUDE_SEGMENTS.
void apply_env_overrides(RunConfig& config);

}  // namespace nearcrash
