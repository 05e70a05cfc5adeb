#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "nearcrash/apriori.hpp"
#include "nearcrash/model.hpp"

namespace {

using namespace nearcrash;

// Transactions shaped like the real encoding: ~12 items drawn from a few
// levels per feature, plus one of two class items.
TransactionDatabase synthetic_db(int transactions, int features, int levels,
                                 unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> level(0, levels - 1);
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<Transaction> out;
  out.reserve(transactions);
  for (int t = 0; t < transactions; ++t) {
    std::vector<Item> items;
    for (int f = 0; f < features; ++f) {
      items.push_back(canonical_item("f" + std::to_string(f),
                                     "v" + std::to_string(level(rng))));
    }
    items.push_back(canonical_item("sev", coin(rng) ? "trivial" : "non-trivial"));
    out.push_back(Transaction{std::to_string(t), Itemset(std::move(items))});
  }
  return TransactionDatabase(std::move(out));
}

void BM_MineFrequent(benchmark::State& state) {
  TransactionDatabase db =
      synthetic_db(static_cast<int>(state.range(0)), 11, 4, 20240901);
  for (auto _ : state) {
    FrequentItemsetTable table = mine_frequent(db, 0.1, 5);
    benchmark::DoNotOptimize(table.total_itemsets());
  }
}
BENCHMARK(BM_MineFrequent)->Arg(250)->Arg(1000)->Arg(4000);

void BM_GenerateClassRules(benchmark::State& state) {
  TransactionDatabase db =
      synthetic_db(static_cast<int>(state.range(0)), 11, 3, 20240902);
  FrequentItemsetTable table = mine_frequent(db, 0.05, 5);
  MiningParams params;
  params.class_feature = "sev";
  params.min_support = 0.05;
  for (auto _ : state) {
    auto rules = generate_class_rules(table, db, params);
    benchmark::DoNotOptimize(rules.size());
  }
}
BENCHMARK(BM_GenerateClassRules)->Arg(1000);

void BM_CountSupport(benchmark::State& state) {
  TransactionDatabase db = synthetic_db(1000, 11, 3, 20240903);
  FrequentItemsetTable table = mine_frequent(db, 0.05, 2);
  std::vector<Itemset> candidates;
  auto pairs = table.by_size.find(2);
  if (pairs != table.by_size.end()) {
    for (const auto& [itemset, count] : pairs->second) candidates.push_back(itemset);
  }
  for (auto _ : state) {
    auto counts = count_support(db, candidates);
    benchmark::DoNotOptimize(counts.size());
  }
}
BENCHMARK(BM_CountSupport);

}  // namespace
