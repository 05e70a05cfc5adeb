#include "nearcrash/model.hpp"

#include <algorithm>

#include "nearcrash/errors.hpp"
#include "nearcrash/textio.hpp"

namespace nearcrash {

Item canonical_item(std::string_view feature, std::string_view level) {
  if (feature.empty()) throw ValidationError("canonical_item: empty feature name");
  if (level.empty()) throw ValidationError("canonical_item: empty level label");
  Item item;
  item.feature = to_lower(feature);
  item.level = std::string(level);
  item.text = item.feature + "=" + item.level;
  return item;
}

Itemset::Itemset(std::vector<Item> items) : items_(std::move(items)) {
  std::sort(items_.begin(), items_.end());
  items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

Itemset::Itemset(std::initializer_list<Item> items)
    : Itemset(std::vector<Item>(items)) {}

bool Itemset::contains(const Item& item) const {
  return std::binary_search(items_.begin(), items_.end(), item);
}

bool Itemset::contains_all(const Itemset& other) const {
  return std::includes(items_.begin(), items_.end(), other.items_.begin(),
                       other.items_.end());
}

Itemset Itemset::without(const Item& item) const {
  std::vector<Item> rest;
  rest.reserve(items_.size());
  for (const Item& i : items_) {
    if (i != item) rest.push_back(i);
  }
  Itemset out;
  out.items_ = std::move(rest);  // already sorted and unique
  return out;
}

std::string Itemset::to_string(std::string_view sep) const {
  std::string out;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (i > 0) out += sep;
    out += items_[i].text;
  }
  return out;
}

bool Itemset::operator<(const Itemset& other) const {
  return std::lexicographical_compare(items_.begin(), items_.end(),
                                      other.items_.begin(), other.items_.end());
}

Itemset itemset_union(const Itemset& a, const Itemset& b) {
  std::vector<Item> merged;
  merged.reserve(a.size() + b.size());
  std::merge(a.items().begin(), a.items().end(), b.items().begin(),
             b.items().end(), std::back_inserter(merged));
  return Itemset(std::move(merged));
}

TransactionDatabase::TransactionDatabase(std::vector<Transaction> transactions)
    : transactions_(std::move(transactions)) {
  std::vector<Item> all;
  for (const Transaction& t : transactions_) {
    all.insert(all.end(), t.items.items().begin(), t.items.items().end());
  }
  universe_ = Itemset(std::move(all));
}

Metrics compute_metrics(std::int64_t count_antecedent, std::int64_t count_joint,
                        std::int64_t count_consequent, std::int64_t n) {
  if (n <= 0) throw ValidationError("compute_metrics: n must be positive");
  if (count_antecedent <= 0 || count_consequent <= 0)
    throw ValidationError("compute_metrics: antecedent and consequent counts must be positive");
  if (count_joint < 0 || count_joint > count_antecedent || count_joint > count_consequent)
    throw ValidationError("compute_metrics: joint count exceeds a marginal count");
  if (count_antecedent > n || count_consequent > n)
    throw ValidationError("compute_metrics: marginal count exceeds database size");

  Metrics m;
  m.support = static_cast<double>(count_joint) / static_cast<double>(n);
  m.confidence = static_cast<double>(count_joint) / static_cast<double>(count_antecedent);
  m.lift = (static_cast<double>(count_joint) * static_cast<double>(n)) /
           (static_cast<double>(count_antecedent) * static_cast<double>(count_consequent));
  return m;
}

void MiningParams::validate() const {
  if (!(min_support > 0.0 && min_support <= 1.0))
    throw ValidationError("MiningParams: min_support must be in (0, 1]");
  if (!(min_confidence > 0.0 && min_confidence <= 1.0))
    throw ValidationError("MiningParams: min_confidence must be in (0, 1]");
  if (minlen < 2) throw ValidationError("MiningParams: minlen must be at least 2");
  if (maxlen < minlen) throw ValidationError("MiningParams: maxlen must be >= minlen");
  if (class_feature.empty()) throw ValidationError("MiningParams: class_feature must be set");
}

}  // namespace nearcrash
