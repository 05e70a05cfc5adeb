#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nearcrash/model.hpp"
#include "nearcrash/spatial.hpp"

namespace nearcrash {

/// Maps numeric and categorical event attributes onto category levels.
/// Numeric intervals are half-open [lo, hi); the last interval is closed
/// above by +infinity. Zero-width shoulder/median values map to their
/// dedicated "no shoulder"/"no median" level. Lane width snaps to the
/// nearest of 11/12/13 ft (ties toward 12); widths outside [10.5, 13.5]
/// map to "unknown".
class BinningScheme {
 public:
  struct IntervalFeature {
    std::vector<double> breaks;        // strictly increasing
    std::vector<std::string> labels;   // breaks.size() + 1 labels
    std::optional<std::string> zero_label;
  };

  static BinningScheme defaults();

  /// Replaces an interval feature's breakpoints and labels (config override).
  /// Throws ValidationError on non-increasing breaks or label count mismatch.
  void set_interval_feature(const std::string& feature, IntervalFeature def);

  bool has_feature(const std::string& feature) const;
  bool is_interval(const std::string& feature) const;
  const std::vector<std::string>& feature_order() const { return feature_order_; }
  const std::string& class_feature() const { return class_feature_; }

  /// Levels of a feature in report order (zero label first, then intervals
  /// ascending; categorical features list the levels seen in Table use).
  std::vector<std::string> level_order(const std::string& feature) const;

  /// Bins a numeric value. Throws ValidationError for an unknown feature, a
  /// categorical feature, or a non-finite value.
  Item bin_value(const std::string& feature, double value) const;
  /// Bins a label: "unknown" maps to the unknown level; numeric text is
  /// accepted for interval features; categorical labels pass through
  /// verbatim.
  Item bin_value(const std::string& feature, std::string_view level) const;

 private:
  std::map<std::string, IntervalFeature> intervals_;
  std::map<std::string, std::vector<std::string>> categorical_;  // known levels, report order
  std::vector<std::string> feature_order_;
  std::string class_feature_ = "nv_severity";

  friend class BinningSchemeBuilder;
};

/// Encodes one conflated event as a transaction: one item per feature plus
/// exactly one class item. Items at level "unknown" are dropped when
/// `drop_unknown` is set; a segment without a median contributes no
/// median_type item (its absence is carried by "median_width=no median").
Transaction build_transaction(const ConflatedEvent& event, const BinningScheme& scheme,
                              bool drop_unknown = false);

struct BuiltDatabase {
  TransactionDatabase db;
  std::map<Item, std::int64_t> item_counts;  // per-item transaction counts
};

/// Builds the transaction database plus the per-item frequency table.
/// Throws ValidationError on an empty event list or duplicate event ids.
BuiltDatabase build_database(const std::vector<ConflatedEvent>& events,
                             const BinningScheme& scheme, bool drop_unknown = false);

struct LevelCount {
  std::string feature;
  std::string level;
  std::int64_t count = 0;
};

/// Per-feature level counts in report order (the summary-statistics table
/// layout): levels with zero count are omitted, "unknown" sorts last.
std::vector<LevelCount> feature_level_counts(const BuiltDatabase& built,
                                             const BinningScheme& scheme);

struct ItemFrequencyRow {
  Item item;
  std::int64_t count = 0;
  std::int64_t scope_size = 0;  // relative frequency = count / scope_size
};

/// Item frequencies over the whole database, or over the transactions
/// containing `scope` when given (class-conditional tables). Sorted by
/// relative frequency descending, ties by item text; truncated to top_n.
std::vector<ItemFrequencyRow> item_frequency_rows(const TransactionDatabase& db,
                                                  const std::optional<Item>& scope,
                                                  std::size_t top_n);

}  // namespace nearcrash
