#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace nearcrash {

/// One categorical value, e.g. feature "median_type" at level "unprotected".
/// The canonical rendering is "feature=level" with the feature lowercased;
/// it doubles as the total order every itemset operation relies on.
struct Item {
  std::string feature;
  std::string level;
  std::string text;  // canonical "feature=level"

  bool operator==(const Item& other) const {
    return feature == other.feature && level == other.level;
  }
  bool operator!=(const Item& other) const { return !(*this == other); }
  bool operator<(const Item& other) const { return text < other.text; }
};

/// Builds an Item from a feature name and a level label. The feature is
/// lowercased; the level is kept verbatim. Throws ValidationError when
/// either part is empty.
Item canonical_item(std::string_view feature, std::string_view level);

/// A sorted, duplicate-free set of Items. Sorted order is the canonical
/// order; the Apriori join step depends on it.
class Itemset {
 public:
  Itemset() = default;
  explicit Itemset(std::vector<Item> items);
  Itemset(std::initializer_list<Item> items);

  const std::vector<Item>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const Item& at(std::size_t i) const { return items_[i]; }

  bool contains(const Item& item) const;
  /// True when every item of `other` is present here.
  bool contains_all(const Itemset& other) const;
  /// Copy with one item removed (no-op if absent).
  Itemset without(const Item& item) const;

  /// Items joined by `sep`, in canonical order.
  std::string to_string(std::string_view sep = ", ") const;

  bool operator==(const Itemset& other) const { return items_ == other.items_; }
  bool operator!=(const Itemset& other) const { return !(*this == other); }
  bool operator<(const Itemset& other) const;

 private:
  std::vector<Item> items_;
};

/// Sorted, deduplicated union of two itemsets.
Itemset itemset_union(const Itemset& a, const Itemset& b);

/// One near-crash event encoded as a set of categorical items.
struct Transaction {
  std::string id;
  Itemset items;
};

/// The mined corpus: every transaction plus the universe of distinct items.
class TransactionDatabase {
 public:
  explicit TransactionDatabase(std::vector<Transaction> transactions);

  const std::vector<Transaction>& transactions() const { return transactions_; }
  std::int64_t size() const { return static_cast<std::int64_t>(transactions_.size()); }
  const Itemset& item_universe() const { return universe_; }

 private:
  std::vector<Transaction> transactions_;
  Itemset universe_;
};

struct Metrics {
  double support = 0.0;
  double confidence = 0.0;
  double lift = 0.0;
};

/// Support, confidence and lift from raw co-occurrence counts:
///   support    = count_joint / n
///   confidence = count_joint / count_antecedent
///   lift       = count_joint * n / (count_antecedent * count_consequent)
/// Requires 0 <= count_joint <= min(count_antecedent, count_consequent) <= n
/// and positive count_antecedent, count_consequent, n; anything else signals
/// inconsistent counting and throws ValidationError.
Metrics compute_metrics(std::int64_t count_antecedent, std::int64_t count_joint,
                        std::int64_t count_consequent, std::int64_t n);

/// A class association rule: antecedent itemset implying one class item.
/// Raw counts are kept alongside the derived metrics so that report
/// rendering can round from exact integer ratios.
struct AssociationRule {
  Itemset antecedent;
  Item consequent;
  double support = 0.0;
  double confidence = 0.0;
  double lift = 0.0;
  std::int64_t count = 0;             // transactions containing antecedent + consequent
  std::int64_t antecedent_count = 0;  // transactions containing the antecedent
  std::int64_t consequent_count = 0;  // transactions containing the consequent
  std::int64_t n = 0;                 // database size
  int order = 0;                      // |antecedent| + 1
};

/// Mining thresholds and rule-length bounds. Lengths count the consequent,
/// so a 3-item rule has two antecedent items.
struct MiningParams {
  double min_support = 0.1;
  double min_confidence = 0.1;
  int minlen = 3;
  int maxlen = 5;
  std::string class_feature = "nv_severity";

  /// Throws ValidationError unless 0 < min_support <= 1,
  /// 0 < min_confidence <= 1 and 2 <= minlen <= maxlen.
  void validate() const;
};

}  // namespace nearcrash
