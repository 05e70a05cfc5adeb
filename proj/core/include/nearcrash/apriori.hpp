#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nearcrash/model.hpp"

namespace nearcrash {

/// Frequent itemsets by size with their exact support counts.
struct FrequentItemsetTable {
  std::int64_t n = 0;  // database size
  std::map<std::size_t, std::map<Itemset, std::int64_t>> by_size;

  /// Count lookup across sizes; nullopt when the itemset is not stored.
  std::optional<std::int64_t> count(const Itemset& itemset) const;
  std::size_t total_itemsets() const;
};

/// Exact containment counts for each candidate; the empty itemset counts
/// every transaction.
std::map<Itemset, std::int64_t> count_support(const TransactionDatabase& db,
                                              const std::vector<Itemset>& candidates);

/// Apriori join: merges pairs of (k-1)-itemsets sharing their first k-2
/// items into k-candidates. Input and output are canonically sorted.
std::vector<Itemset> join_step(const std::vector<Itemset>& frequent_k_minus_1);

/// Apriori prune: keeps a candidate iff every (k-1)-subset is frequent.
std::vector<Itemset> prune_step(const std::vector<Itemset>& candidates,
                                const std::vector<Itemset>& frequent_k_minus_1);

/// Level-wise frequent-itemset mining. Returns exactly the itemsets of size
/// <= max_size whose support count / n >= min_support, with exact counts.
/// Throws ValidationError on an empty database or out-of-range parameters.
FrequentItemsetTable mine_frequent(const TransactionDatabase& db, double min_support,
                                   int max_size);

/// Emits one rule per frequent itemset that contains exactly one class item
/// and satisfies the length bounds: (itemset minus class) -> class item,
/// kept when confidence >= params.min_confidence. Rule support is the
/// support of the whole itemset. The table must have been mined with
/// max_size = params.maxlen and the same min_support.
std::vector<AssociationRule> generate_class_rules(const FrequentItemsetTable& table,
                                                  const TransactionDatabase& db,
                                                  const MiningParams& params);

enum class RankKey { kLift, kConfidence, kSupport };

/// Descending sort by the chosen key, ties broken by confidence, support,
/// antecedent rendering, then consequent; optionally filtered to one
/// consequent and truncated to top_k (top_k < 0 keeps everything).
std::vector<AssociationRule> rank_rules(std::vector<AssociationRule> rules, RankKey key,
                                        int top_k,
                                        const std::optional<Item>& consequent = {});

/// Per-consequent metric summary (count, mean/min/max of S, C, L).
struct RuleGroupSummary {
  Item consequent;
  std::int64_t rule_count = 0;
  double support_mean = 0.0, support_min = 0.0, support_max = 0.0;
  double confidence_mean = 0.0, confidence_min = 0.0, confidence_max = 0.0;
  double lift_mean = 0.0, lift_min = 0.0, lift_max = 0.0;
};

/// Summaries grouped by consequent, ordered by consequent item; empty
/// groups never appear.
std::vector<RuleGroupSummary> summarize_rules(const std::vector<AssociationRule>& rules);

}  // namespace nearcrash
