#include "nearcrash/apriori.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "nearcrash/errors.hpp"

namespace nearcrash {

std::optional<std::int64_t> FrequentItemsetTable::count(const Itemset& itemset) const {
  auto level = by_size.find(itemset.size());
  if (level == by_size.end()) return std::nullopt;
  auto it = level->second.find(itemset);
  if (it == level->second.end()) return std::nullopt;
  return it->second;
}

std::size_t FrequentItemsetTable::total_itemsets() const {
  std::size_t total = 0;
  for (const auto& [size, level] : by_size) total += level.size();
  return total;
}

std::map<Itemset, std::int64_t> count_support(const TransactionDatabase& db,
                                              const std::vector<Itemset>& candidates) {
  std::map<Itemset, std::int64_t> counts;
  for (const Itemset& candidate : candidates) counts[candidate] = 0;
  for (const Transaction& t : db.transactions()) {
    for (auto& [candidate, count] : counts) {
      if (t.items.contains_all(candidate)) ++count;
    }
  }
  return counts;
}

std::vector<Itemset> join_step(const std::vector<Itemset>& frequent_k_minus_1) {
  std::set<Itemset> out;
  for (std::size_t i = 0; i < frequent_k_minus_1.size(); ++i) {
    const auto& a = frequent_k_minus_1[i].items();
    for (std::size_t j = i + 1; j < frequent_k_minus_1.size(); ++j) {
      const auto& b = frequent_k_minus_1[j].items();
      if (a.size() != b.size() || a.empty()) continue;
      bool shared_prefix =
          std::equal(a.begin(), a.end() - 1, b.begin(), b.end() - 1);
      if (!shared_prefix || a.back() == b.back()) continue;
      std::vector<Item> merged(a.begin(), a.end());
      merged.push_back(b.back());
      out.insert(Itemset(std::move(merged)));
    }
  }
  return std::vector<Itemset>(out.begin(), out.end());
}

std::vector<Itemset> prune_step(const std::vector<Itemset>& candidates,
                                const std::vector<Itemset>& frequent_k_minus_1) {
  std::set<Itemset> frequent(frequent_k_minus_1.begin(), frequent_k_minus_1.end());
  std::vector<Itemset> surviving;
  for (const Itemset& candidate : candidates) {
    bool all_subsets_frequent = true;
    for (const Item& item : candidate.items()) {
      if (!frequent.count(candidate.without(item))) {
        all_subsets_frequent = false;
        break;
      }
    }
    if (all_subsets_frequent) surviving.push_back(candidate);
  }
  return surviving;
}

FrequentItemsetTable mine_frequent(const TransactionDatabase& db, double min_support,
                                   int max_size) {
  if (db.size() == 0) throw ValidationError("mine_frequent: empty database");
  if (!(min_support > 0.0 && min_support <= 1.0))
    throw ValidationError("mine_frequent: min_support must be in (0, 1]");
  if (max_size < 1) throw ValidationError("mine_frequent: max_size must be >= 1");

  FrequentItemsetTable table;
  table.n = db.size();
  const double n = static_cast<double>(table.n);
  auto is_frequent = [&](std::int64_t count) {
    return static_cast<double>(count) / n >= min_support;
  };

  std::vector<Itemset> singletons;
  for (const Item& item : db.item_universe().items()) singletons.push_back(Itemset{item});

  std::vector<Itemset> frequent_prev;
  for (auto& [itemset, count] : count_support(db, singletons)) {
    if (is_frequent(count)) {
      table.by_size[1][itemset] = count;
      frequent_prev.push_back(itemset);
    }
  }

  for (int k = 2; k <= max_size && !frequent_prev.empty(); ++k) {
    std::vector<Itemset> candidates = prune_step(join_step(frequent_prev), frequent_prev);
    if (candidates.empty()) break;
    std::vector<Itemset> frequent_k;
    for (auto& [itemset, count] : count_support(db, candidates)) {
      if (is_frequent(count)) {
        table.by_size[static_cast<std::size_t>(k)][itemset] = count;
        frequent_k.push_back(itemset);
      }
    }
    frequent_prev = std::move(frequent_k);
  }
  return table;
}

std::vector<AssociationRule> generate_class_rules(const FrequentItemsetTable& table,
                                                  const TransactionDatabase& db,
                                                  const MiningParams& params) {
  params.validate();

  bool class_present = false;
  for (const Item& item : db.item_universe().items()) {
    if (item.feature == params.class_feature) {
      class_present = true;
      break;
    }
  }
  if (!class_present)
    throw ValidationError("generate_class_rules: class feature '" +
                          params.class_feature + "' absent from the database");

  std::vector<AssociationRule> rules;
  for (const auto& [size, level] : table.by_size) {
    if (size < static_cast<std::size_t>(params.minlen) ||
        size > static_cast<std::size_t>(params.maxlen))
      continue;
    for (const auto& [itemset, joint_count] : level) {
      const Item* class_item = nullptr;
      int class_items = 0;
      for (const Item& item : itemset.items()) {
        if (item.feature == params.class_feature) {
          class_item = &item;
          ++class_items;
        }
      }
      if (class_items != 1) continue;

      Itemset antecedent = itemset.without(*class_item);
      auto antecedent_count = table.count(antecedent);
      auto consequent_count = table.count(Itemset{*class_item});
      if (!antecedent_count || !consequent_count)
        throw ValidationError(
            "generate_class_rules: table lacks a subset count; it must be mined "
            "with the same min_support and max_size = maxlen");

      Metrics m = compute_metrics(*antecedent_count, joint_count, *consequent_count,
                                  table.n);
      if (m.confidence < params.min_confidence) continue;

      AssociationRule rule;
      rule.antecedent = std::move(antecedent);
      rule.consequent = *class_item;
      rule.support = m.support;
      rule.confidence = m.confidence;
      rule.lift = m.lift;
      rule.count = joint_count;
      rule.antecedent_count = *antecedent_count;
      rule.consequent_count = *consequent_count;
      rule.n = table.n;
      rule.order = static_cast<int>(rule.antecedent.size()) + 1;
      rules.push_back(std::move(rule));
    }
  }

  std::sort(rules.begin(), rules.end(),
            [](const AssociationRule& a, const AssociationRule& b) {
              if (a.order != b.order) return a.order < b.order;
              if (a.antecedent != b.antecedent) return a.antecedent < b.antecedent;
              return a.consequent < b.consequent;
            });
  return rules;
}

std::vector<AssociationRule> rank_rules(std::vector<AssociationRule> rules, RankKey key,
                                        int top_k, const std::optional<Item>& consequent) {
  if (consequent) {
    rules.erase(std::remove_if(rules.begin(), rules.end(),
                               [&](const AssociationRule& r) {
                                 return !(r.consequent == *consequent);
                               }),
                rules.end());
  }

  auto key_value = [key](const AssociationRule& r) {
    switch (key) {
      case RankKey::kLift: return r.lift;
      case RankKey::kConfidence: return r.confidence;
      default: return r.support;
    }
  };
  std::stable_sort(rules.begin(), rules.end(),
                   [&](const AssociationRule& a, const AssociationRule& b) {
                     double ka = key_value(a), kb = key_value(b);
                     if (ka != kb) return ka > kb;
                     if (a.confidence != b.confidence) return a.confidence > b.confidence;
                     if (a.support != b.support) return a.support > b.support;
                     std::string ra = a.antecedent.to_string();
                     std::string rb = b.antecedent.to_string();
                     if (ra != rb) return ra < rb;
                     return a.consequent < b.consequent;
                   });
  if (top_k >= 0 && rules.size() > static_cast<std::size_t>(top_k))
    rules.resize(static_cast<std::size_t>(top_k));
  return rules;
}

std::vector<RuleGroupSummary> summarize_rules(const std::vector<AssociationRule>& rules) {
  std::map<Item, std::vector<const AssociationRule*>> groups;
  for (const AssociationRule& rule : rules) groups[rule.consequent].push_back(&rule);

  std::vector<RuleGroupSummary> out;
  for (const auto& [consequent, members] : groups) {
    RuleGroupSummary s;
    s.consequent = consequent;
    s.rule_count = static_cast<std::int64_t>(members.size());
    s.support_min = s.confidence_min = s.lift_min = std::numeric_limits<double>::infinity();
    s.support_max = s.confidence_max = s.lift_max = -std::numeric_limits<double>::infinity();
    for (const AssociationRule* r : members) {
      s.support_mean += r->support;
      s.confidence_mean += r->confidence;
      s.lift_mean += r->lift;
      s.support_min = std::min(s.support_min, r->support);
      s.support_max = std::max(s.support_max, r->support);
      s.confidence_min = std::min(s.confidence_min, r->confidence);
      s.confidence_max = std::max(s.confidence_max, r->confidence);
      s.lift_min = std::min(s.lift_min, r->lift);
      s.lift_max = std::max(s.lift_max, r->lift);
    }
    s.support_mean /= static_cast<double>(s.rule_count);
    s.confidence_mean /= static_cast<double>(s.rule_count);
    s.lift_mean /= static_cast<double>(s.rule_count);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace nearcrash
