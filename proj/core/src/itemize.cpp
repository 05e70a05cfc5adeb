#include "nearcrash/itemize.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "nearcrash/errors.hpp"
#include "nearcrash/textio.hpp"

namespace nearcrash {

namespace {

constexpr const char* kUnknownLevel = "unknown";

// Lane-width levels: snap to the nearest of 11/12/13 ft, ties toward 12.
std::optional<int> snap_lane_width(double value) {
  if (value < 10.5 || value > 13.5) return std::nullopt;
  double best_dist = std::abs(value - 12.0);
  int best = 12;
  for (int candidate : {11, 13}) {
    double d = std::abs(value - candidate);
    if (d < best_dist) {
      best_dist = d;
      best = candidate;
    }
  }
  return best;
}

}  // namespace

BinningScheme BinningScheme::defaults() {
  BinningScheme s;
  s.feature_order_ = {"speed",        "functional class", "access_con",
                      "shoulder_width", "lane_width",     "median_type",
                      "median_width", "speed_limit",      "peak",
                      "aadt",         "traveltime",       "nv_severity"};

  s.intervals_["speed"] = IntervalFeature{
      {30.0, 60.0}, {"less than 30 mph", "30 - 60 mph", "larger than 60 mph"}, {}};
  s.intervals_["shoulder_width"] = IntervalFeature{
      {4.0, 8.0},
      {"less than 4 ft", "4 - 8 ft", "larger than 8 ft"},
      std::string("no shoulder")};
  s.intervals_["median_width"] = IntervalFeature{
      {35.0, 60.0},
      {"less than 35 ft", "35 - 60 ft", "larger than 60 ft"},
      std::string("no median")};
  s.intervals_["speed_limit"] = IntervalFeature{
      {30.0, 60.0}, {"less than 30 mph", "30 - 60 mph", "larger than 60 mph"}, {}};
  s.intervals_["aadt"] = IntervalFeature{
      {20'000.0, 40'000.0, 70'000.0},
      {"less than 20,000 vehicles per day (vpd)", "20,000 – 40,000 vpd",
       "40,000 – 70,000 vpd", "more than 70,000 vpd"},
      {}};
  s.intervals_["traveltime"] = IntervalFeature{
      {20.0, 60.0, 120.0},
      {"less than 20 minutes", "20 to 60 minutes", "1 - 2 hours",
       "longer than 2 hours"},
      {}};

  s.categorical_["functional class"] = {"interstate",      "local",
                                        "major collector", "minor arterial",
                                        "minor collector", "principal arterial"};
  s.categorical_["access_con"] = {"no", "yes"};
  s.categorical_["median_type"] = {"barrier", "curbed", "unprotected"};
  s.categorical_["peak"] = {"no", "yes"};
  s.categorical_["nv_severity"] = {"non-trivial", "trivial"};
  s.categorical_["lane_width"] = {"11 ft", "12 ft", "13 ft"};  // snap feature
  return s;
}

void BinningScheme::set_interval_feature(const std::string& feature, IntervalFeature def) {
  if (def.breaks.empty())
    throw ValidationError("binning override for '" + feature + "': no breakpoints");
  for (std::size_t i = 1; i < def.breaks.size(); ++i) {
    if (!(def.breaks[i] > def.breaks[i - 1]))
      throw ValidationError("binning override for '" + feature +
                            "': breakpoints must be strictly increasing");
  }
  if (def.labels.size() != def.breaks.size() + 1)
    throw ValidationError("binning override for '" + feature +
                          "': need exactly breaks+1 labels");
  if (feature == "lane_width")
    throw ValidationError("lane_width uses snap levels and cannot take interval overrides");
  if (intervals_.find(feature) == intervals_.end())
    throw ValidationError("binning override for unknown feature '" + feature + "'");
  intervals_[feature] = std::move(def);
}

bool BinningScheme::has_feature(const std::string& feature) const {
  return intervals_.count(feature) > 0 || categorical_.count(feature) > 0 ||
         feature == "lane_width";
}

bool BinningScheme::is_interval(const std::string& feature) const {
  return intervals_.count(feature) > 0 || feature == "lane_width";
}

std::vector<std::string> BinningScheme::level_order(const std::string& feature) const {
  auto it = intervals_.find(feature);
  if (it != intervals_.end()) {
    std::vector<std::string> out;
    if (it->second.zero_label) out.push_back(*it->second.zero_label);
    out.insert(out.end(), it->second.labels.begin(), it->second.labels.end());
    return out;
  }
  auto cat = categorical_.find(feature);
  if (cat != categorical_.end()) return cat->second;
  throw ValidationError("level_order: unknown feature '" + feature + "'");
}

Item BinningScheme::bin_value(const std::string& feature, double value) const {
  if (!has_feature(feature))
    throw ValidationError("bin_value: unknown feature '" + feature + "'");
  if (!std::isfinite(value))
    throw ValidationError("bin_value: non-finite value for '" + feature + "'");

  if (feature == "lane_width") {
    auto snapped = snap_lane_width(value);
    if (!snapped) return canonical_item(feature, kUnknownLevel);
    return canonical_item(feature, std::to_string(*snapped) + " ft");
  }

  auto it = intervals_.find(feature);
  if (it == intervals_.end())
    throw ValidationError("bin_value: feature '" + feature +
                          "' is categorical; bin it with a label");
  const IntervalFeature& def = it->second;
  if (def.zero_label && value == 0.0) return canonical_item(feature, *def.zero_label);
  std::size_t idx = 0;
  while (idx < def.breaks.size() && value >= def.breaks[idx]) ++idx;
  return canonical_item(feature, def.labels[idx]);
}

Item BinningScheme::bin_value(const std::string& feature, std::string_view level) const {
  if (!has_feature(feature))
    throw ValidationError("bin_value: unknown feature '" + feature + "'");
  std::string text(trim(level));
  if (to_lower(text) == kUnknownLevel) return canonical_item(feature, kUnknownLevel);
  if (is_interval(feature)) {
    auto numeric = parse_double(text);
    if (!numeric)
      throw ValidationError("bin_value: feature '" + feature +
                            "' expects a numeric value, got '" + text + "'");
    return bin_value(feature, *numeric);
  }
  return canonical_item(feature, text);
}

Transaction build_transaction(const ConflatedEvent& event, const BinningScheme& scheme,
                              bool drop_unknown) {
  const NearCrashEvent& e = event.event;
  const RoadSegment& seg = event.segment;

  std::vector<Item> items;
  auto add_numeric = [&](const std::string& feature, const std::optional<double>& value) {
    items.push_back(value ? scheme.bin_value(feature, *value)
                          : canonical_item(feature, kUnknownLevel));
  };
  auto add_label = [&](const std::string& feature, const std::string& level) {
    items.push_back(scheme.bin_value(feature, std::string_view(level)));
  };

  add_numeric("speed", e.speed_mph);
  add_label("functional class", seg.functional_class);
  add_label("access_con", seg.access_control);
  add_numeric("shoulder_width", seg.shoulder_width_ft);
  add_numeric("lane_width", seg.lane_width_ft);
  // A "none" median type carries no item; "median_width=no median" already
  // expresses the absence.
  if (seg.median_type != "none") add_label("median_type", seg.median_type);
  add_numeric("median_width", seg.median_width_ft);
  add_numeric("speed_limit", seg.speed_limit_mph);
  add_label("peak", to_string(e.peak_hour));
  add_numeric("aadt", seg.aadt_vpd);
  add_numeric("traveltime", e.trip_duration_min);

  if (drop_unknown) {
    items.erase(std::remove_if(items.begin(), items.end(),
                               [](const Item& i) { return i.level == kUnknownLevel; }),
                items.end());
  }
  items.push_back(canonical_item(scheme.class_feature(), to_string(e.severity)));

  Transaction t;
  t.id = e.device + "/" + e.trip + "@" + std::to_string(e.event_time_cs);
  t.items = Itemset(std::move(items));
  return t;
}

BuiltDatabase build_database(const std::vector<ConflatedEvent>& events,
                             const BinningScheme& scheme, bool drop_unknown) {
  if (events.empty())
    throw ValidationError("build_database: no events to encode");

  std::vector<Transaction> transactions;
  transactions.reserve(events.size());
  std::set<std::string> seen_ids;
  for (const ConflatedEvent& event : events) {
    Transaction t = build_transaction(event, scheme, drop_unknown);
    if (!seen_ids.insert(t.id).second)
      throw ValidationError("build_database: duplicate event id '" + t.id + "'");
    transactions.push_back(std::move(t));
  }

  BuiltDatabase built{TransactionDatabase(std::move(transactions)), {}};
  for (const Transaction& t : built.db.transactions()) {
    for (const Item& item : t.items.items()) ++built.item_counts[item];
  }
  return built;
}

std::vector<LevelCount> feature_level_counts(const BuiltDatabase& built,
                                             const BinningScheme& scheme) {
  std::vector<LevelCount> out;
  for (const std::string& feature : scheme.feature_order()) {
    // Observed levels, keyed to the scheme's report order; extras (e.g.
    // passthrough categories) follow alphabetically, unknown last.
    std::map<std::string, std::int64_t> observed;
    for (const auto& [item, count] : built.item_counts) {
      if (item.feature == feature) observed[item.level] = count;
    }
    for (const std::string& level : scheme.level_order(feature)) {
      auto it = observed.find(level);
      if (it != observed.end()) {
        out.push_back(LevelCount{feature, level, it->second});
        observed.erase(it);
      }
    }
    std::int64_t unknown_count = 0;
    if (auto it = observed.find(kUnknownLevel); it != observed.end()) {
      unknown_count = it->second;
      observed.erase(it);
    }
    for (const auto& [level, count] : observed)
      out.push_back(LevelCount{feature, level, count});
    if (unknown_count > 0)
      out.push_back(LevelCount{feature, kUnknownLevel, unknown_count});
  }
  return out;
}

std::vector<ItemFrequencyRow> item_frequency_rows(const TransactionDatabase& db,
                                                  const std::optional<Item>& scope,
                                                  std::size_t top_n) {
  std::map<Item, std::int64_t> counts;
  std::int64_t scope_size = 0;
  for (const Transaction& t : db.transactions()) {
    if (scope && !t.items.contains(*scope)) continue;
    ++scope_size;
    for (const Item& item : t.items.items()) ++counts[item];
  }

  std::vector<ItemFrequencyRow> rows;
  rows.reserve(counts.size());
  for (const auto& [item, count] : counts)
    rows.push_back(ItemFrequencyRow{item, count, scope_size});
  std::sort(rows.begin(), rows.end(),
            [](const ItemFrequencyRow& a, const ItemFrequencyRow& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.item.text < b.item.text;
            });
  if (rows.size() > top_n) rows.resize(top_n);
  return rows;
}

}  // namespace nearcrash
