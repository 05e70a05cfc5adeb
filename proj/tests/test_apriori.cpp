#include <doctest.h>

#include <random>

#include "nearcrash/apriori.hpp"
#include "nearcrash/errors.hpp"
#include "oracles.hpp"

using namespace nearcrash;
using nearcrash::testing::brute_force_class_rules;
using nearcrash::testing::brute_force_frequent;
using nearcrash::testing::random_database;

namespace {

Item item(const char* level) { return canonical_item("f", level); }

// T1{a,b,c} T2{a,c} T3{a,d} T4{b,c} T5{a,b,c}
TransactionDatabase toy_database() {
  Item a = item("a"), b = item("b"), c = item("c"), d = item("d");
  return TransactionDatabase({
      Transaction{"T1", Itemset{a, b, c}},
      Transaction{"T2", Itemset{a, c}},
      Transaction{"T3", Itemset{a, d}},
      Transaction{"T4", Itemset{b, c}},
      Transaction{"T5", Itemset{a, b, c}},
  });
}

}  // namespace

TEST_CASE("count_support scans exact containment counts") {
  TransactionDatabase db = toy_database();
  Item a = item("a"), c = item("c");
  auto counts = count_support(db, {Itemset{a, c}, Itemset{}, Itemset{item("zz")}});
  CHECK(counts.at(Itemset{a, c}) == 3);
  CHECK(counts.at(Itemset{}) == 5);
  CHECK(counts.at(Itemset{item("zz")}) == 0);
}

TEST_CASE("join_step merges shared-prefix pairs") {
  Item a = item("a"), b = item("b"), c = item("c"), d = item("d");
  auto joined = join_step({Itemset{a, b}, Itemset{a, c}, Itemset{b, c}});
  REQUIRE(joined.size() == 1);
  CHECK(joined[0] == Itemset{a, b, c});

  CHECK(join_step({Itemset{a, b}, Itemset{c, d}}).empty());

  auto pairs = join_step({Itemset{a}, Itemset{b}, Itemset{c}});
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0] == Itemset{a, b});
  CHECK(pairs[1] == Itemset{a, c});
  CHECK(pairs[2] == Itemset{b, c});
}

TEST_CASE("prune_step enforces downward closure on candidates") {
  Item a = item("a"), b = item("b"), c = item("c");
  Itemset abc{a, b, c};
  auto kept = prune_step({abc}, {Itemset{a, b}, Itemset{a, c}, Itemset{b, c}});
  CHECK(kept.size() == 1);
  auto pruned = prune_step({abc}, {Itemset{a, b}, Itemset{a, c}});
  CHECK(pruned.empty());
  // k = 2: singletons are the only subsets, so frequency is the only gate.
  auto pairs = prune_step({Itemset{a, b}}, {Itemset{a}, Itemset{b}});
  CHECK(pairs.size() == 1);
}

TEST_CASE("mine_frequent recovers the toy table exactly") {
  TransactionDatabase db = toy_database();
  FrequentItemsetTable table = mine_frequent(db, 0.4, 3);
  Item a = item("a"), b = item("b"), c = item("c");

  CHECK(table.total_itemsets() == 7);
  CHECK(table.count(Itemset{a}) == 4);
  CHECK(table.count(Itemset{b}) == 3);
  CHECK(table.count(Itemset{c}) == 4);
  CHECK(table.count(Itemset{a, b}) == 2);
  CHECK(table.count(Itemset{a, c}) == 3);
  CHECK(table.count(Itemset{b, c}) == 3);
  CHECK(table.count(Itemset{a, b, c}) == 2);
  CHECK_FALSE(table.count(Itemset{item("d")}).has_value());
}

TEST_CASE("mine_frequent parameter validation and min_support = 1") {
  TransactionDatabase db = toy_database();
  CHECK_THROWS_AS(mine_frequent(db, 1.5, 3), ValidationError);
  CHECK_THROWS_AS(mine_frequent(db, 0.0, 3), ValidationError);
  CHECK_THROWS_AS(mine_frequent(TransactionDatabase({}), 0.5, 3), ValidationError);

  FrequentItemsetTable everything = mine_frequent(db, 1.0, 3);
  CHECK(everything.total_itemsets() == 0);  // no item is in all five transactions
}

TEST_CASE("downward closure holds on every stored level") {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    TransactionDatabase db = random_database(rng, 8, 40);
    FrequentItemsetTable table = mine_frequent(db, 0.15, 4);
    for (const auto& [size, level] : table.by_size) {
      for (const auto& [itemset, count] : level) {
        for (const Item& member : itemset.items()) {
          if (itemset.size() == 1) continue;
          auto subset_count = table.count(itemset.without(member));
          REQUIRE(subset_count.has_value());
          CHECK(*subset_count >= count);
        }
      }
    }
  }
}

TEST_CASE("generate_class_rules measures the documented toy rule") {
  // T1{x,y,trivial} T2{x,trivial} T3{x,y,nontrivial} T4{y,trivial}
  Item x = canonical_item("x", "1"), y = canonical_item("y", "1");
  Item trivial = canonical_item("sev", "trivial");
  Item nontrivial = canonical_item("sev", "nontrivial");
  TransactionDatabase db({
      Transaction{"T1", Itemset{x, y, trivial}},
      Transaction{"T2", Itemset{x, trivial}},
      Transaction{"T3", Itemset{x, y, nontrivial}},
      Transaction{"T4", Itemset{y, trivial}},
  });

  MiningParams params;
  params.min_support = 0.2;
  params.min_confidence = 0.1;
  params.minlen = 3;
  params.maxlen = 3;
  params.class_feature = "sev";
  FrequentItemsetTable table = mine_frequent(db, params.min_support, params.maxlen);
  auto rules = generate_class_rules(table, db, params);

  bool found = false;
  for (const AssociationRule& rule : rules) {
    if (rule.antecedent == Itemset{x, y} && rule.consequent == trivial) {
      found = true;
      CHECK(rule.support == doctest::Approx(0.25).epsilon(1e-12));
      CHECK(rule.confidence == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(rule.lift == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
      CHECK(rule.count == 1);
      CHECK(rule.order == 3);
    }
    // minlen 3 means every rule here has two antecedent items.
    CHECK(rule.antecedent.size() == 2);
    CHECK(rule.consequent.feature == "sev");
  }
  CHECK(found);
}

TEST_CASE("min_confidence = 1 keeps only exceptionless rules") {
  Item x = canonical_item("x", "1"), y = canonical_item("y", "1");
  Item hi = canonical_item("sev", "hi"), lo = canonical_item("sev", "lo");
  TransactionDatabase db({
      Transaction{"T1", Itemset{x, y, hi}},
      Transaction{"T2", Itemset{x, y, hi}},
      Transaction{"T3", Itemset{x, lo}},
  });
  MiningParams params;
  params.min_support = 0.1;
  params.min_confidence = 1.0;
  params.minlen = 2;
  params.maxlen = 3;
  params.class_feature = "sev";
  auto rules = generate_class_rules(mine_frequent(db, 0.1, 3), db, params);
  for (const AssociationRule& rule : rules)
    CHECK(rule.confidence == doctest::Approx(1.0));
  // {x,y} -> hi is exceptionless; {x} -> hi is not.
  bool xy_hi = false, x_hi = false;
  for (const AssociationRule& rule : rules) {
    if (rule.antecedent == Itemset{x, y} && rule.consequent == hi) xy_hi = true;
    if (rule.antecedent == Itemset{x} && rule.consequent == hi) x_hi = true;
  }
  CHECK(xy_hi);
  CHECK_FALSE(x_hi);
}

TEST_CASE("generate_class_rules rejects a database without the class feature") {
  TransactionDatabase db = toy_database();
  MiningParams params;
  params.class_feature = "sev";
  params.minlen = 2;
  CHECK_THROWS_AS(generate_class_rules(mine_frequent(db, 0.2, 5), db, params),
                  ValidationError);
}

TEST_CASE("rule metric identities hold exactly on mined rules") {
  std::mt19937 rng(777);
  for (int trial = 0; trial < 30; ++trial) {
    TransactionDatabase db = random_database(rng, 7, 50);
    MiningParams params;
    params.min_support = 0.1;
    params.min_confidence = 0.1;
    params.minlen = 2;
    params.maxlen = 4;
    params.class_feature = "sev";
    auto rules =
        generate_class_rules(mine_frequent(db, params.min_support, params.maxlen), db,
                             params);
    for (const AssociationRule& r : rules) {
      // lift * S(consequent) = confidence; confidence * sigma(antecedent) = count
      CHECK(r.lift * (static_cast<double>(r.consequent_count) / r.n) ==
            doctest::Approx(r.confidence).epsilon(1e-12));
      CHECK(r.confidence * r.antecedent_count ==
            doctest::Approx(static_cast<double>(r.count)).epsilon(1e-12));
      // exact in cross-multiplied integers
      CHECK(r.count * r.n * 1.0 ==
            doctest::Approx(r.support * r.n * r.n).epsilon(1e-6));
    }
  }
}

TEST_CASE("miner equals the brute-force oracle on random databases") {
  std::mt19937 rng(31415);
  std::uniform_real_distribution<double> support_dist(0.05, 0.6);
  for (int trial = 0; trial < 25; ++trial) {
    TransactionDatabase db = random_database(rng, 8, 48);
    const double min_support = support_dist(rng);

    FrequentItemsetTable mined = mine_frequent(db, min_support, 4);
    auto expected = brute_force_frequent(db, min_support, 4);
    std::size_t expected_total = 0;
    for (const auto& [size, level] : expected) expected_total += level.size();
    REQUIRE(mined.total_itemsets() == expected_total);
    for (const auto& [size, level] : expected) {
      for (const auto& [itemset, count] : level) {
        auto mined_count = mined.count(itemset);
        REQUIRE(mined_count.has_value());
        CHECK(*mined_count == count);
      }
    }

    MiningParams params;
    params.min_support = min_support;
    params.min_confidence = 0.25;
    params.minlen = 2;
    params.maxlen = 4;
    params.class_feature = "sev";
    auto rules = generate_class_rules(mined, db, params);
    auto oracle_rules = brute_force_class_rules(db, params);
    REQUIRE(rules.size() == oracle_rules.size());
    for (std::size_t i = 0; i < rules.size(); ++i) {
      CHECK(rules[i].antecedent == oracle_rules[i].antecedent);
      CHECK(rules[i].consequent == oracle_rules[i].consequent);
      CHECK(rules[i].count == oracle_rules[i].count);
      CHECK(rules[i].support == doctest::Approx(oracle_rules[i].support).epsilon(1e-12));
      CHECK(rules[i].confidence ==
            doctest::Approx(oracle_rules[i].confidence).epsilon(1e-12));
      CHECK(rules[i].lift == doctest::Approx(oracle_rules[i].lift).epsilon(1e-12));
    }
  }
}

TEST_CASE("rank_rules sorts by lift with the documented tie-breaks") {
  auto make_rule = [](double lift, double confidence, double support, const char* level) {
    AssociationRule r;
    r.antecedent = Itemset{canonical_item("a", level)};
    r.consequent = canonical_item("sev", "hi");
    r.lift = lift;
    r.confidence = confidence;
    r.support = support;
    return r;
  };
  std::vector<AssociationRule> rules{make_rule(1.4, 0.5, 0.2, "p"),
                                     make_rule(1.2, 0.5, 0.2, "q"),
                                     make_rule(1.3, 0.5, 0.2, "r")};
  auto ranked = rank_rules(rules, RankKey::kLift, -1, {});
  CHECK(ranked[0].lift == doctest::Approx(1.4));
  CHECK(ranked[1].lift == doctest::Approx(1.3));
  CHECK(ranked[2].lift == doctest::Approx(1.2));

  rules = {make_rule(1.3, 0.4, 0.2, "p"), make_rule(1.3, 0.7, 0.2, "q")};
  ranked = rank_rules(rules, RankKey::kLift, -1, {});
  CHECK(ranked[0].confidence == doctest::Approx(0.7));  // higher confidence first

  rules = {make_rule(1.1, 0.4, 0.2, "p"), make_rule(1.3, 0.7, 0.2, "q"),
           make_rule(1.2, 0.7, 0.2, "r")};
  ranked = rank_rules(rules, RankKey::kLift, 2, {});
  CHECK(ranked.size() == 2);  // truncation to top_k

  AssociationRule other = make_rule(9.9, 0.9, 0.9, "z");
  other.consequent = canonical_item("sev", "lo");
  rules.push_back(other);
  ranked = rank_rules(rules, RankKey::kLift, 10, canonical_item("sev", "hi"));
  CHECK(ranked.size() == 3);
  for (const AssociationRule& r : ranked) CHECK(r.consequent.level == "hi");
}

TEST_CASE("summarize_rules reports count, mean, min and max per consequent") {
  auto make_rule = [](double lift, const char* consequent_level) {
    AssociationRule r;
    r.antecedent = Itemset{canonical_item("a", "x")};
    r.consequent = canonical_item("sev", consequent_level);
    r.support = 0.2;
    r.confidence = 0.5;
    r.lift = lift;
    return r;
  };
  std::vector<AssociationRule> rules{make_rule(1.0, "hi"), make_rule(1.2, "hi"),
                                     make_rule(1.4, "hi"), make_rule(0.9, "lo")};
  auto summaries = summarize_rules(rules);
  REQUIRE(summaries.size() == 2);
  const RuleGroupSummary& hi = summaries[0];
  CHECK(hi.consequent.level == "hi");
  CHECK(hi.rule_count == 3);
  CHECK(hi.lift_mean == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(hi.lift_min == doctest::Approx(1.0));
  CHECK(hi.lift_max == doctest::Approx(1.4));
  const RuleGroupSummary& lo = summaries[1];
  CHECK(lo.rule_count == 1);
  CHECK(lo.lift_mean == doctest::Approx(lo.lift_min));
  CHECK(lo.lift_mean == doctest::Approx(lo.lift_max));

  CHECK(summarize_rules({}).empty());
}

TEST_CASE("raising thresholds never adds rules") {
  std::mt19937 rng(2718);
  for (int trial = 0; trial < 10; ++trial) {
    TransactionDatabase db = random_database(rng, 7, 60);
    MiningParams base;
    base.min_support = 0.08;
    base.min_confidence = 0.1;
    base.minlen = 2;
    base.maxlen = 4;
    base.class_feature = "sev";
    auto baseline = generate_class_rules(mine_frequent(db, base.min_support, 4), db, base);

    auto contains = [&](const std::vector<AssociationRule>& haystack,
                        const AssociationRule& needle) {
      for (const AssociationRule& r : haystack) {
        if (r.antecedent == needle.antecedent && r.consequent == needle.consequent)
          return true;
      }
      return false;
    };

    MiningParams tighter = base;
    tighter.min_support = 0.3;
    auto fewer = generate_class_rules(mine_frequent(db, 0.3, 4), db, tighter);
    for (const AssociationRule& r : fewer) CHECK(contains(baseline, r));

    tighter = base;
    tighter.min_confidence = 0.6;
    auto confident =
        generate_class_rules(mine_frequent(db, base.min_support, 4), db, tighter);
    for (const AssociationRule& r : confident) CHECK(contains(baseline, r));
  }
}
