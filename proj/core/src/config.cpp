#include "nearcrash/config.hpp"

#include <cstdlib>
#include <set>

#include <json.hpp>

#include "nearcrash/errors.hpp"
#include "nearcrash/events.hpp"
#include "nearcrash/textio.hpp"

namespace nearcrash {

BinningScheme RunConfig::binning() const {
  BinningScheme scheme = BinningScheme::defaults();
  for (const auto& [feature, def] : bin_overrides)
    scheme.set_interval_feature(feature, def);
  return scheme;
}

void RunConfig::validate() const {
  try {
    mining.validate();
    PeakWindows::parse(peak_windows);
    BinningScheme scheme = binning();
    // The pipeline encodes transactions with the scheme's class feature;
    // mining against any other class can never match.
    if (mining.class_feature != scheme.class_feature())
      throw ValidationError("config: class_feature must be '" +
                            scheme.class_feature() + "' for pipeline runs");
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  if (trajectory.empty())
    throw ConfigError("config: no trajectory input given");
  if (trajectory.size() > 2)
    throw ConfigError("config: at most two trajectory files (state + front targets)");
  for (const auto& path : trajectory) {
    if (!std::filesystem::exists(path))
      throw ConfigError("config: trajectory file not found: " + path.string());
  }
  if (segments.empty()) throw ConfigError("config: no segment file given");
  if (!std::filesystem::exists(segments))
    throw ConfigError("config: segment file not found: " + segments.string());
  if (exclude_segments && !std::filesystem::exists(*exclude_segments))
    throw ConfigError("config: exclusion list not found: " + exclude_segments->string());
  if (top_k < 0) throw ConfigError("config: top_k must be non-negative");
  if (max_conflation_distance_m <= 0.0)
    throw ConfigError("config: max conflation distance must be positive");
  if (dedup_gap_seconds <= 0.0)
    throw ConfigError("config: dedup gap must be positive");
}

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {
    "trajectory",    "segments",     "exclude_segments",
    "out_dir",       "min_support",  "min_confidence",
    "minlen",        "maxlen",       "class_feature",
    "top_k",         "max_conflation_distance_m", "peak_windows",
    "drop_unknown",  "dedup_gap_seconds",         "bins"};

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& defaults) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  if (!doc.is_object()) throw ConfigError("config file: expected a JSON object");

  RunConfig config = defaults;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (!kKnownKeys.count(key))
        throw ConfigError("config file: unknown key '" + key + "'");
      if (key == "trajectory") {
        config.trajectory.clear();
        if (value.is_string()) {
          config.trajectory.push_back(value.get<std::string>());
        } else if (value.is_array()) {
          for (const json& entry : value)
            config.trajectory.push_back(entry.get<std::string>());
        } else {
          throw ConfigError("config file: 'trajectory' must be a path or list of paths");
        }
      } else if (key == "segments") {
        config.segments = value.get<std::string>();
      } else if (key == "exclude_segments") {
        config.exclude_segments = value.get<std::string>();
      } else if (key == "out_dir") {
        config.out_dir = value.get<std::string>();
      } else if (key == "min_support") {
        config.mining.min_support = value.get<double>();
      } else if (key == "min_confidence") {
        config.mining.min_confidence = value.get<double>();
      } else if (key == "minlen") {
        config.mining.minlen = value.get<int>();
      } else if (key == "maxlen") {
        config.mining.maxlen = value.get<int>();
      } else if (key == "class_feature") {
        config.mining.class_feature = value.get<std::string>();
      } else if (key == "top_k") {
        config.top_k = value.get<int>();
      } else if (key == "max_conflation_distance_m") {
        config.max_conflation_distance_m = value.get<double>();
      } else if (key == "peak_windows") {
        config.peak_windows = value.get<std::string>();
      } else if (key == "drop_unknown") {
        config.drop_unknown = value.get<bool>();
      } else if (key == "dedup_gap_seconds") {
        config.dedup_gap_seconds = value.get<double>();
      } else if (key == "bins") {
        if (!value.is_object())
          throw ConfigError("config file: 'bins' must map features to definitions");
        for (const auto& [feature, def] : value.items()) {
          BinningScheme::IntervalFeature interval;
          interval.breaks = def.at("breaks").get<std::vector<double>>();
          interval.labels = def.at("labels").get<std::vector<std::string>>();
          if (def.contains("zero_label"))
            interval.zero_label = def.at("zero_label").get<std::string>();
          config.bin_overrides[feature] = std::move(interval);
        }
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return config;
}

namespace {

std::optional<std::string> env_value(const char* name) {
  const char* value = std::getenv(name);
  if (!value || *value == '\0') return std::nullopt;
  return std::string(value);
}

double env_double(const char* name, const std::string& value) {
  auto parsed = parse_double(value);
  if (!parsed) throw ConfigError(std::string(name) + ": expected a number, got '" + value + "'");
  return *parsed;
}

int env_int(const char* name, const std::string& value) {
  auto parsed = parse_int(value);
  if (!parsed) throw ConfigError(std::string(name) + ": expected an integer, got '" + value + "'");
  return static_cast<int>(*parsed);
}

}  // namespace

void apply_env_overrides(RunConfig& config) {
  if (auto v = env_value("NEARCRASH_MIN_SUPPORT"))
    config.mining.min_support = env_double("NEARCRASH_MIN_SUPPORT", *v);
  if (auto v = env_value("NEARCRASH_MIN_CONFIDENCE"))
    config.mining.min_confidence = env_double("NEARCRASH_MIN_CONFIDENCE", *v);
  if (auto v = env_value("NEARCRASH_MINLEN"))
    config.mining.minlen = env_int("NEARCRASH_MINLEN", *v);
  if (auto v = env_value("NEARCRASH_MAXLEN"))
    config.mining.maxlen = env_int("NEARCRASH_MAXLEN", *v);
  if (auto v = env_value("NEARCRASH_TOP_K"))
    config.top_k = env_int("NEARCRASH_TOP_K", *v);
  if (auto v = env_value("NEARCRASH_MAX_CONFLATION_DISTANCE"))
    config.max_conflation_distance_m = env_double("NEARCRASH_MAX_CONFLATION_DISTANCE", *v);
  if (auto v = env_value("NEARCRASH_PEAK_WINDOWS")) config.peak_windows = *v;
  if (auto v = env_value("NEARCRASH_DROP_UNKNOWN")) {
    std::string lower = to_lower(*v);
    config.drop_unknown = lower == "1" || lower == "true" || lower == "yes";
  }
  if (auto v = env_value("NEARCRASH_OUT_DIR")) config.out_dir = *v;
  if (auto v = env_value("NEARCRASH_TRAJECTORY")) {
    config.trajectory.clear();
    for (const std::string& part : split_line(*v, ','))
      if (!part.empty()) config.trajectory.push_back(part);
  }
  if (auto v = env_value("NEARCRASH_SEGMENTS")) config.segments = *v;
  if (auto v = env_value("NEARCRASH_EXCLUDE_SEGMENTS")) config.exclude_segments = *v;
}

}  // namespace nearcrash
