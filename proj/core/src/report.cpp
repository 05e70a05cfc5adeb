#include "nearcrash/report.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <istream>
#include <ostream>

#include "nearcrash/errors.hpp"
#include "nearcrash/textio.hpp"

namespace nearcrash {

namespace {

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

std::string render_support(const AssociationRule& r) {
  return format_ratio(r.count, r.n, 3);
}
std::string render_confidence(const AssociationRule& r) {
  return format_ratio(r.count, r.antecedent_count, 3);
}
std::string render_lift(const AssociationRule& r) {
  return format_ratio(r.count * r.n, r.antecedent_count * r.consequent_count, 3);
}

}  // namespace

void write_item_frequencies(std::ostream& out, const TransactionDatabase& db,
                            const std::optional<Item>& scope, std::size_t top_n) {
  out << "item\tcount\trelative_frequency\n";
  for (const ItemFrequencyRow& row : item_frequency_rows(db, scope, top_n)) {
    out << row.item.text << '\t' << row.count << '\t'
        << format_ratio(row.count, std::max<std::int64_t>(row.scope_size, 1), 4) << '\n';
  }
}

void write_feature_levels(std::ostream& out, const BuiltDatabase& built,
                          const BinningScheme& scheme) {
  out << "variable\tlevel\tcount\tpercentage\n";
  const std::int64_t n = built.db.size();
  for (const LevelCount& row : feature_level_counts(built, scheme)) {
    out << row.feature << '\t' << row.level << '\t' << row.count << '\t'
        << format_ratio(row.count * 100, std::max<std::int64_t>(n, 1), 2) << '\n';
  }
}

void write_rule_table(std::ostream& out, const std::vector<AssociationRule>& ranked,
                      int minlen, int maxlen) {
  const int item_columns = std::max(maxlen - 1, 1);
  out << "group\trule";
  for (int i = 1; i <= item_columns; ++i) out << "\titem_" << i;
  out << "\tsupport\tconfidence\tlift\tcount\n";

  // The published layout: minimum-order rules first, then all longer rules
  // in one block, each block sorted by (order, lift desc).
  std::vector<const AssociationRule*> rows;
  rows.reserve(ranked.size());
  for (const AssociationRule& r : ranked) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(),
                   [&](const AssociationRule* a, const AssociationRule* b) {
                     const bool ga = a->order > minlen, gb = b->order > minlen;
                     if (ga != gb) return gb;
                     if (a->order != b->order) return a->order < b->order;
                     return a->lift > b->lift;
                   });

  std::string group_low = std::to_string(minlen) + "-item";
  std::string group_high = minlen + 1 == maxlen
                               ? std::to_string(maxlen) + "-item"
                               : std::to_string(minlen + 1) + "-" +
                                     std::to_string(maxlen) + "-item";

  int index = 0;
  for (const AssociationRule* r : rows) {
    out << (r->order > minlen ? group_high : group_low) << '\t' << ++index;
    const auto& items = r->antecedent.items();
    for (int i = 0; i < item_columns; ++i) {
      out << '\t'
          << (static_cast<std::size_t>(i) < items.size() ? items[i].text : "--");
    }
    out << '\t' << render_support(*r) << '\t' << render_confidence(*r) << '\t'
        << render_lift(*r) << '\t' << r->count << '\n';
  }
}

void write_scatter_data(std::ostream& out, const std::vector<AssociationRule>& rules) {
  out << "support\tconfidence\tlift\torder\tconsequent\n";
  for (const AssociationRule& r : rules) {
    out << render_support(r) << '\t' << render_confidence(r) << '\t' << render_lift(r)
        << '\t' << r.order << '\t' << r.consequent.text << '\n';
  }
}

void write_rule_summary(std::ostream& out, const std::vector<RuleGroupSummary>& summaries) {
  out << "consequent\trules\tsupport_mean\tsupport_min\tsupport_max"
         "\tconfidence_mean\tconfidence_min\tconfidence_max"
         "\tlift_mean\tlift_min\tlift_max\n";
  for (const RuleGroupSummary& s : summaries) {
    out << s.consequent.text << '\t' << s.rule_count << '\t'
        << format_fixed(s.support_mean, 2) << '\t' << format_fixed(s.support_min, 2)
        << '\t' << format_fixed(s.support_max, 2) << '\t'
        << format_fixed(s.confidence_mean, 2) << '\t'
        << format_fixed(s.confidence_min, 2) << '\t'
        << format_fixed(s.confidence_max, 2) << '\t' << format_fixed(s.lift_mean, 2)
        << '\t' << format_fixed(s.lift_min, 2) << '\t' << format_fixed(s.lift_max, 2)
        << '\n';
  }
}

namespace {

constexpr const char* kEventColumns =
    "device\ttrip\tevent_time_cs\tlatitude\tlongitude\tpeak_decel_g\tseverity"
    "\tspeed_mph\ttrip_duration_min\tpeak_hour";

void write_event_row(std::ostream& out, const NearCrashEvent& e) {
  out << e.device << '\t' << e.trip << '\t' << e.event_time_cs << '\t'
      << fmt("%.7f", e.latitude) << '\t' << fmt("%.7f", e.longitude) << '\t'
      << fmt("%.6f", e.peak_decel_g) << '\t' << to_string(e.severity) << '\t'
      << fmt("%.4f", e.speed_mph) << '\t' << fmt("%.4f", e.trip_duration_min) << '\t'
      << to_string(e.peak_hour);
}

NearCrashEvent parse_event_row(const DelimitedReader& reader,
                               const std::vector<std::string>& fields, std::size_t row) {
  auto field = [&](const char* name) -> const std::string& {
    auto col = reader.column(name);
    if (!col) throw ParseError(std::string("events file: missing column ") + name, 1);
    return fields[*col];
  };
  auto num = [&](const char* name) {
    auto v = parse_double(field(name));
    if (!v)
      throw ParseError("events file row " + std::to_string(row) + ": bad numeric field '" +
                           std::string(name) + "'",
                       row);
    return *v;
  };

  NearCrashEvent e;
  e.device = field("device");
  e.trip = field("trip");
  e.event_time_cs = static_cast<std::int64_t>(num("event_time_cs"));
  e.latitude = num("latitude");
  e.longitude = num("longitude");
  e.peak_decel_g = num("peak_decel_g");
  auto severity = parse_severity(field("severity"));
  if (!severity)
    throw ParseError("events file row " + std::to_string(row) + ": bad severity '" +
                         field("severity") + "'",
                     row);
  e.severity = *severity;
  e.speed_mph = num("speed_mph");
  e.trip_duration_min = num("trip_duration_min");
  auto peak = parse_peak_flag(field("peak_hour"));
  if (!peak)
    throw ParseError("events file row " + std::to_string(row) + ": bad peak_hour '" +
                         field("peak_hour") + "'",
                     row);
  e.peak_hour = *peak;
  return e;
}

std::string render_optional(const std::optional<double>& v, const char* format) {
  return v ? fmt(format, *v) : std::string("unknown");
}

std::optional<double> parse_optional(const std::string& text) {
  if (to_lower(trim(text)) == "unknown") return std::nullopt;
  return parse_double(text);
}

void require_columns(const DelimitedReader& reader, const char* file_kind,
                     std::initializer_list<const char*> names) {
  for (const char* name : names) {
    if (!reader.column(name))
      throw ParseError(std::string(file_kind) + ": missing column " + name, 1);
  }
}

}  // namespace

void write_events_file(std::ostream& out, const std::vector<NearCrashEvent>& events) {
  out << kEventColumns << '\n';
  for (const NearCrashEvent& e : events) {
    write_event_row(out, e);
    out << '\n';
  }
}

std::vector<NearCrashEvent> read_events_file(std::istream& in) {
  DelimitedReader reader(in);
  require_columns(reader, "events file",
                  {"device", "trip", "event_time_cs", "latitude", "longitude",
                   "peak_decel_g", "severity", "speed_mph", "trip_duration_min",
                   "peak_hour"});
  std::vector<NearCrashEvent> events;
  std::vector<std::string> fields;
  while (reader.next_row(fields))
    events.push_back(parse_event_row(reader, fields, reader.row_number()));
  return events;
}

void write_conflated_file(std::ostream& out, const std::vector<ConflatedEvent>& events) {
  out << kEventColumns
      << "\tsegment_id\tdistance_m\tf_system\taccess_con\tmedian_type"
         "\tshoulder_width\tlane_width\tmedian_width\tspeed_limit\taadt\n";
  for (const ConflatedEvent& c : events) {
    write_event_row(out, c.event);
    out << '\t' << c.segment.segment_id << '\t' << fmt("%.3f", c.distance_m) << '\t'
        << c.segment.functional_class << '\t' << c.segment.access_control << '\t'
        << c.segment.median_type << '\t'
        << render_optional(c.segment.shoulder_width_ft, "%.2f") << '\t'
        << render_optional(c.segment.lane_width_ft, "%.2f") << '\t'
        << render_optional(c.segment.median_width_ft, "%.2f") << '\t'
        << render_optional(c.segment.speed_limit_mph, "%.2f") << '\t'
        << render_optional(c.segment.aadt_vpd, "%.2f") << '\n';
  }
}

std::vector<ConflatedEvent> read_conflated_file(std::istream& in) {
  DelimitedReader reader(in);
  require_columns(reader, "conflated file",
                  {"device", "trip", "event_time_cs", "latitude", "longitude",
                   "peak_decel_g", "severity", "speed_mph", "trip_duration_min",
                   "peak_hour", "segment_id", "distance_m", "f_system", "access_con",
                   "median_type", "shoulder_width", "lane_width", "median_width",
                   "speed_limit", "aadt"});
  std::vector<ConflatedEvent> events;
  std::vector<std::string> fields;
  while (reader.next_row(fields)) {
    const std::size_t row = reader.row_number();
    auto field = [&](const char* name) -> const std::string& {
      auto col = reader.column(name);
      if (!col) throw ParseError(std::string("conflated file: missing column ") + name, 1);
      return fields[*col];
    };

    ConflatedEvent c;
    c.event = parse_event_row(reader, fields, row);
    auto id = parse_int(field("segment_id"));
    if (!id)
      throw ParseError("conflated file row " + std::to_string(row) + ": bad segment_id",
                       row);
    c.segment.segment_id = *id;
    auto distance = parse_double(field("distance_m"));
    if (!distance)
      throw ParseError("conflated file row " + std::to_string(row) + ": bad distance_m",
                       row);
    c.distance_m = *distance;
    c.segment.functional_class = field("f_system");
    c.segment.access_control = field("access_con");
    c.segment.median_type = field("median_type");
    c.segment.shoulder_width_ft = parse_optional(field("shoulder_width"));
    c.segment.lane_width_ft = parse_optional(field("lane_width"));
    c.segment.median_width_ft = parse_optional(field("median_width"));
    c.segment.speed_limit_mph = parse_optional(field("speed_limit"));
    c.segment.aadt_vpd = parse_optional(field("aadt"));
    events.push_back(std::move(c));
  }
  return events;
}

std::string sanitize_level(const std::string& level) {
  std::string out;
  bool last_sep = false;
  for (unsigned char c : to_lower(level)) {
    if (std::isalnum(c)) {
      out += static_cast<char>(c);
      last_sep = false;
    } else if (!last_sep && !out.empty()) {
      out += '_';
      last_sep = true;
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "level" : out;
}

}  // namespace nearcrash
