#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nearcrash/apriori.hpp"
#include "nearcrash/itemize.hpp"
#include "nearcrash/spatial.hpp"

namespace nearcrash {

// All report files are tab-separated with a single header row, fixed column
// order and fixed number formatting, so identical inputs produce identical
// bytes. Fractions are rendered from exact integer counts.

/// Top-n item frequencies (whole database or class-conditional when `scope`
/// is set). Columns: item, count, relative_frequency.
void write_item_frequencies(std::ostream& out, const TransactionDatabase& db,
                            const std::optional<Item>& scope, std::size_t top_n = 20);

/// Per-variable level counts and percentages. Columns: variable, level,
/// count, percentage.
void write_feature_levels(std::ostream& out, const BuiltDatabase& built,
                          const BinningScheme& scheme);

/// Ranked-rule table for one consequent, grouped like the published tables:
/// minimum-order rules first, then the longer orders, each block sorted by
/// lift. Columns: group, rule, item_1..item_{maxlen-1}, support, confidence,
/// lift, count.
void write_rule_table(std::ostream& out, const std::vector<AssociationRule>& ranked,
                      int minlen, int maxlen);

/// One row per rule for scatter plotting. Columns: support, confidence,
/// lift, order, consequent.
void write_scatter_data(std::ostream& out, const std::vector<AssociationRule>& rules);

/// Per-consequent metric summary, two decimals. Columns: consequent, rules,
/// then mean/min/max for support, confidence and lift.
void write_rule_summary(std::ostream& out, const std::vector<RuleGroupSummary>& summaries);

// Stage files passed between the extract / conflate / mine subcommands.

void write_events_file(std::ostream& out, const std::vector<NearCrashEvent>& events);
std::vector<NearCrashEvent> read_events_file(std::istream& in);

/// The conflated table carries event columns plus segment attributes; the
/// segment geometry itself is not round-tripped (downstream stages never
/// use it).
void write_conflated_file(std::ostream& out, const std::vector<ConflatedEvent>& events);
std::vector<ConflatedEvent> read_conflated_file(std::istream& in);

/// Filesystem-safe rendering of a level label ("non-trivial" ->
/// "non_trivial"); used to name per-class output files.
std::string sanitize_level(const std::string& level);

}  // namespace nearcrash
