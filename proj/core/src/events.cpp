#include "nearcrash/events.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <tuple>

#include "nearcrash/errors.hpp"
#include "nearcrash/textio.hpp"

namespace nearcrash {

double accel_to_g(double accel_mps2) {
  if (!std::isfinite(accel_mps2))
    throw ValidationError("accel_to_g: non-finite acceleration");
  return accel_mps2 / kStandardGravity;
}

namespace {

// Civil-calendar day arithmetic (proleptic Gregorian), days since 1970-01-01.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = static_cast<int>(y - era * 400);
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const int doe = static_cast<int>(z - era * 146097);
  const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int yr = yoe + static_cast<int>(era) * 400;
  const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const int mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = yr + (m <= 2);
}

bool valid_civil(int y, int m, int d) {
  if (m < 1 || m > 12 || d < 1 || d > 31) return false;
  int yy, mm, dd;
  civil_from_days(days_from_civil(y, m, d), yy, mm, dd);
  return yy == y && mm == m && dd == d;
}

}  // namespace

std::optional<LocalTime> LocalTime::parse(std::string_view text) {
  std::string s(trim(text));
  std::replace(s.begin(), s.end(), 'T', ' ');
  LocalTime t;
  int matched = std::sscanf(s.c_str(), "%d-%d-%d %d:%d:%d", &t.year, &t.month,
                            &t.day, &t.hour, &t.minute, &t.second);
  if (matched < 5) return std::nullopt;
  if (matched == 5) t.second = 0;
  if (!valid_civil(t.year, t.month, t.day)) return std::nullopt;
  if (t.hour < 0 || t.hour > 23 || t.minute < 0 || t.minute > 59 ||
      t.second < 0 || t.second > 59)
    return std::nullopt;
  return t;
}

int LocalTime::weekday() const {
  std::int64_t days = days_from_civil(year, month, day);
  return static_cast<int>(((days % 7) + 11) % 7);  // 1970-01-01 is a Thursday
}

bool LocalTime::is_weekday() const {
  int wd = weekday();
  return wd >= 1 && wd <= 5;
}

LocalTime LocalTime::plus_seconds(std::int64_t seconds) const {
  std::int64_t total = days_from_civil(year, month, day) * 86400 +
                       hour * 3600 + minute * 60 + second + seconds;
  std::int64_t days = total >= 0 ? total / 86400 : (total - 86399) / 86400;
  int sod = static_cast<int>(total - days * 86400);
  LocalTime t;
  civil_from_days(days, t.year, t.month, t.day);
  t.hour = sod / 3600;
  t.minute = (sod % 3600) / 60;
  t.second = sod % 60;
  return t;
}

std::string LocalTime::to_string() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", year, month,
                day, hour, minute, second);
  return buf;
}

PeakWindows PeakWindows::defaults() { return parse("07:00-09:00,16:00-18:00"); }

PeakWindows PeakWindows::parse(std::string_view text) {
  PeakWindows out;
  for (const std::string& part : split_line(text, ',')) {
    int h1, m1, h2, m2;
    if (std::sscanf(part.c_str(), "%d:%d-%d:%d", &h1, &m1, &h2, &m2) != 4)
      throw ValidationError("peak windows: expected HH:MM-HH:MM, got '" + part + "'");
    Window w{h1 * 60 + m1, h2 * 60 + m2};
    if (h1 < 0 || h1 > 23 || h2 < 0 || h2 > 24 || m1 < 0 || m1 > 59 || m2 < 0 ||
        m2 > 59 || w.begin_minute >= w.end_minute)
      throw ValidationError("peak windows: invalid window '" + part + "'");
    out.windows.push_back(w);
  }
  if (out.windows.empty()) throw ValidationError("peak windows: empty specification");
  return out;
}

bool PeakWindows::is_peak(const LocalTime& t) const {
  if (!t.is_weekday()) return false;
  int mod = t.minute_of_day();
  for (const Window& w : windows) {
    if (mod >= w.begin_minute && mod < w.end_minute) return true;
  }
  return false;
}

std::string PeakWindows::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (i > 0) out += ",";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%02d:%02d-%02d:%02d",
                  windows[i].begin_minute / 60, windows[i].begin_minute % 60,
                  windows[i].end_minute / 60, windows[i].end_minute % 60);
    out += buf;
  }
  return out;
}

namespace {

struct TripKey {
  std::string device;
  std::string trip;
  bool operator<(const TripKey& o) const {
    return std::tie(device, trip) < std::tie(o.device, o.trip);
  }
};

double require_double(const std::vector<std::string>& fields, std::size_t col,
                      const char* name, std::size_t row) {
  auto v = parse_double(fields[col]);
  if (!v)
    throw ParseError("row " + std::to_string(row) + ": field '" + name +
                         "' is not numeric: '" + fields[col] + "'",
                     row);
  return *v;
}

std::int64_t require_time(const std::vector<std::string>& fields, std::size_t col,
                          std::size_t row) {
  auto v = parse_int(fields[col]);
  if (!v)
    throw ParseError("row " + std::to_string(row) + ": field 'Time' is not an integer: '" +
                         fields[col] + "'",
                     row);
  if (*v < 0)
    throw ParseError("row " + std::to_string(row) + ": negative Time", row);
  return *v;
}

std::size_t require_column(const DelimitedReader& reader, const char* name) {
  auto col = reader.column(name);
  if (!col) throw ParseError(std::string("missing required column: ") + name, 1);
  return *col;
}

struct LeadInfo {
  bool cipv = false;
  std::optional<double> range_m;
  std::optional<std::string> target_type;
};

void finalize_trips(std::map<TripKey, TripRecords>& grouped, ParseResult& out) {
  for (auto& [key, trip] : grouped) {
    auto& records = trip.records;
    std::sort(records.begin(), records.end(),
              [](const TrajectoryRecord& a, const TrajectoryRecord& b) {
                return a.time_cs < b.time_cs;
              });
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (records[i].time_cs == records[i - 1].time_cs)
        throw ParseError("duplicate Time " + std::to_string(records[i].time_cs) +
                         " in trip " + key.device + "/" + key.trip);
    }
    if (!records.empty()) trip.duration_cs = records.back().time_cs - records.front().time_cs;
    out.trips.push_back(std::move(trip));
  }
}

}  // namespace

ParseResult parse_trajectory_stream(std::istream& joined) {
  DelimitedReader reader(joined);
  const std::size_t c_device = require_column(reader, "device");
  const std::size_t c_trip = require_column(reader, "trip");
  const std::size_t c_time = require_column(reader, "time");
  const std::size_t c_lat = require_column(reader, "latitudewsu");
  const std::size_t c_lon = require_column(reader, "longitudewsu");
  const std::size_t c_speed = require_column(reader, "gpsspeedwsu");
  const std::size_t c_accel = require_column(reader, "axwsu");
  const std::size_t c_cipv = require_column(reader, "cipv");
  const std::size_t c_range = require_column(reader, "range");
  const auto c_target = reader.column("targettype");
  const auto c_start = reader.column("tripstart");

  std::map<TripKey, TripRecords> grouped;
  std::vector<std::string> fields;
  while (reader.next_row(fields)) {
    const std::size_t row = reader.row_number();
    TrajectoryRecord rec;
    rec.time_cs = require_time(fields, c_time, row);
    rec.latitude = require_double(fields, c_lat, "LatitudeWsu", row);
    rec.longitude = require_double(fields, c_lon, "LongitudeWsu", row);
    rec.speed_mps = require_double(fields, c_speed, "GpsSpeedWsu", row);
    rec.accel_mps2 = require_double(fields, c_accel, "AxWsu", row);
    if (!trim(fields[c_cipv]).empty())
      rec.cipv = require_double(fields, c_cipv, "CIPV", row) != 0.0;
    if (!trim(fields[c_range]).empty())
      rec.range_m = require_double(fields, c_range, "Range", row);
    if (c_target && !trim(fields[*c_target]).empty())
      rec.target_type = to_lower(trim(fields[*c_target]));

    TripKey key{fields[c_device], fields[c_trip]};
    TripRecords& trip = grouped[key];
    if (trip.records.empty()) {
      trip.device = key.device;
      trip.trip = key.trip;
    }
    if (c_start && !trim(fields[*c_start]).empty() && !trip.trip_start) {
      trip.trip_start = LocalTime::parse(fields[*c_start]);
      if (!trip.trip_start)
        throw ParseError("row " + std::to_string(row) + ": unparseable TripStart '" +
                             fields[*c_start] + "'",
                         row);
    }
    trip.records.push_back(std::move(rec));
  }

  ParseResult out;
  out.tally.rows_read = reader.rows_read();
  out.tally.rows_malformed = reader.rows_malformed();
  finalize_trips(grouped, out);
  return out;
}

ParseResult parse_trajectory_stream(std::istream& state, std::istream& front_targets) {
  // Lead-vehicle observations keyed by (device, trip, time). Several target
  // rows can share a key; the closest-in-path one wins, nearest range first.
  struct LeadKey {
    std::string device, trip;
    std::int64_t time_cs;
    bool operator<(const LeadKey& o) const {
      return std::tie(device, trip, time_cs) < std::tie(o.device, o.trip, o.time_cs);
    }
  };
  std::map<LeadKey, LeadInfo> leads;
  std::size_t target_rows = 0;

  {
    DelimitedReader reader(front_targets);
    const std::size_t c_device = require_column(reader, "device");
    const std::size_t c_trip = require_column(reader, "trip");
    const std::size_t c_time = require_column(reader, "time");
    const std::size_t c_cipv = require_column(reader, "cipv");
    const std::size_t c_range = require_column(reader, "range");
    const auto c_target = reader.column("targettype");

    std::vector<std::string> fields;
    while (reader.next_row(fields)) {
      const std::size_t row = reader.row_number();
      ++target_rows;
      LeadKey key{fields[c_device], fields[c_trip], require_time(fields, c_time, row)};
      LeadInfo info;
      if (!trim(fields[c_cipv]).empty())
        info.cipv = require_double(fields, c_cipv, "CIPV", row) != 0.0;
      if (!trim(fields[c_range]).empty())
        info.range_m = require_double(fields, c_range, "Range", row);
      if (c_target && !trim(fields[*c_target]).empty())
        info.target_type = to_lower(trim(fields[*c_target]));

      auto [it, inserted] = leads.emplace(key, info);
      if (!inserted) {
        LeadInfo& existing = it->second;
        bool replace = false;
        if (info.cipv && !existing.cipv) {
          replace = true;
        } else if (info.cipv == existing.cipv) {
          double a = info.range_m.value_or(std::numeric_limits<double>::infinity());
          double b = existing.range_m.value_or(std::numeric_limits<double>::infinity());
          replace = a < b;
        }
        if (replace) existing = info;
      }
    }
  }

  DelimitedReader reader(state);
  const std::size_t c_device = require_column(reader, "device");
  const std::size_t c_trip = require_column(reader, "trip");
  const std::size_t c_time = require_column(reader, "time");
  const std::size_t c_lat = require_column(reader, "latitudewsu");
  const std::size_t c_lon = require_column(reader, "longitudewsu");
  const std::size_t c_speed = require_column(reader, "gpsspeedwsu");
  const std::size_t c_accel = require_column(reader, "axwsu");
  const auto c_start = reader.column("tripstart");

  std::map<TripKey, TripRecords> grouped;
  std::size_t matched = 0;
  std::vector<std::string> fields;
  while (reader.next_row(fields)) {
    const std::size_t row = reader.row_number();
    TrajectoryRecord rec;
    rec.time_cs = require_time(fields, c_time, row);
    rec.latitude = require_double(fields, c_lat, "LatitudeWsu", row);
    rec.longitude = require_double(fields, c_lon, "LongitudeWsu", row);
    rec.speed_mps = require_double(fields, c_speed, "GpsSpeedWsu", row);
    rec.accel_mps2 = require_double(fields, c_accel, "AxWsu", row);

    auto it = leads.find(LeadKey{fields[c_device], fields[c_trip], rec.time_cs});
    if (it != leads.end()) {
      rec.cipv = it->second.cipv;
      rec.range_m = it->second.range_m;
      rec.target_type = it->second.target_type;
      ++matched;
    }

    TripKey key{fields[c_device], fields[c_trip]};
    TripRecords& trip = grouped[key];
    if (trip.records.empty()) {
      trip.device = key.device;
      trip.trip = key.trip;
    }
    if (c_start && !trim(fields[*c_start]).empty() && !trip.trip_start) {
      trip.trip_start = LocalTime::parse(fields[*c_start]);
      if (!trip.trip_start)
        throw ParseError("row " + std::to_string(row) + ": unparseable TripStart '" +
                             fields[*c_start] + "'",
                         row);
    }
    trip.records.push_back(std::move(rec));
  }

  ParseResult out;
  out.tally.rows_read = reader.rows_read();
  out.tally.rows_malformed = reader.rows_malformed();
  out.tally.unmatched_target_rows = target_rows >= matched ? target_rows - matched : 0;
  finalize_trips(grouped, out);
  return out;
}

ParseResult parse_trajectory(const std::filesystem::path& joined) {
  std::ifstream in = open_input(joined);
  return parse_trajectory_stream(in);
}

ParseResult parse_trajectory(const std::filesystem::path& state,
                             const std::filesystem::path& front_targets) {
  std::ifstream in_state = open_input(state);
  std::ifstream in_targets = open_input(front_targets);
  return parse_trajectory_stream(in_state, in_targets);
}

FilterResult filter_records(std::vector<TripRecords> trips) {
  FilterResult out;
  out.tally.trips_in = trips.size();
  for (TripRecords& trip : trips) {
    out.tally.records_in += trip.records.size();
    if (trip.duration_cs < kMinTripDurationCs) {
      ++out.tally.trips_short;
      out.tally.records_in_short_trips += trip.records.size();
      continue;
    }
    std::vector<TrajectoryRecord> kept;
    kept.reserve(trip.records.size());
    for (TrajectoryRecord& rec : trip.records) {
      if (!rec.cipv) {
        ++out.tally.cipv_excluded;
        continue;
      }
      if (rec.target_type &&
          (*rec.target_type == "pedestrian" || *rec.target_type == "bicycle")) {
        ++out.tally.target_type_excluded;
        continue;
      }
      if (rec.range_m && *rec.range_m > kMaxLeadRangeMeters) {
        ++out.tally.range_excluded;
        continue;
      }
      kept.push_back(std::move(rec));
    }
    out.tally.records_kept += kept.size();
    trip.records = std::move(kept);
    out.trips.push_back(std::move(trip));
  }
  return out;
}

std::vector<Candidate> detect_candidates(const TripRecords& trip) {
  std::vector<Candidate> out;
  for (const TrajectoryRecord& rec : trip.records) {
    double g = accel_to_g(rec.accel_mps2);
    if (g <= kDetectionThresholdG) out.push_back(Candidate{rec.time_cs, g, rec});
  }
  return out;
}

std::string to_string(Severity s) {
  return s == Severity::kTrivial ? "trivial" : "non-trivial";
}

std::optional<Severity> parse_severity(std::string_view s) {
  std::string lower = to_lower(trim(s));
  if (lower == "trivial") return Severity::kTrivial;
  if (lower == "non-trivial" || lower == "non_trivial") return Severity::kNonTrivial;
  return std::nullopt;
}

Severity classify_severity(double peak_decel_g) {
  if (peak_decel_g > kDetectionThresholdG)
    throw ValidationError("classify_severity: " + std::to_string(peak_decel_g) +
                          " g is above the detection threshold");
  return peak_decel_g <= kSeverityThresholdG ? Severity::kNonTrivial
                                             : Severity::kTrivial;
}

std::vector<EventCore> deduplicate(const std::vector<Candidate>& candidates,
                                   double gap_seconds) {
  if (gap_seconds <= 0.0) throw ValidationError("deduplicate: gap must be positive");
  const double gap_cs = gap_seconds * 100.0;
  std::vector<EventCore> events;
  const Candidate* peak = nullptr;
  std::int64_t prev_time = 0;

  auto flush = [&](const Candidate& c) {
    events.push_back(EventCore{c.time_cs, c.record.latitude, c.record.longitude,
                               c.accel_g, c.record.speed_mps});
  };

  for (const Candidate& c : candidates) {
    if (peak && static_cast<double>(c.time_cs - prev_time) > gap_cs) {
      flush(*peak);
      peak = nullptr;
    }
    if (!peak || c.accel_g < peak->accel_g) peak = &c;
    prev_time = c.time_cs;
  }
  if (peak) flush(*peak);
  return events;
}

std::string to_string(PeakFlag f) {
  switch (f) {
    case PeakFlag::kNo: return "no";
    case PeakFlag::kYes: return "yes";
    default: return "unknown";
  }
}

std::optional<PeakFlag> parse_peak_flag(std::string_view s) {
  std::string lower = to_lower(trim(s));
  if (lower == "no") return PeakFlag::kNo;
  if (lower == "yes") return PeakFlag::kYes;
  if (lower == "unknown") return PeakFlag::kUnknown;
  return std::nullopt;
}

TripFeatures trip_features(const TripRecords& trip, const EventCore& event,
                           const PeakWindows& windows) {
  TripFeatures out;
  out.speed_mph = event.peak_speed_mps * kMpsToMph;
  out.trip_duration_min = static_cast<double>(trip.duration_cs) / 6000.0;
  if (trip.trip_start) {
    LocalTime at = trip.trip_start->plus_seconds(event.event_time_cs / 100);
    out.peak_hour = windows.is_peak(at) ? PeakFlag::kYes : PeakFlag::kNo;
  } else {
    out.peak_hour = PeakFlag::kUnknown;
  }
  return out;
}

ExtractionResult extract_events(std::vector<TripRecords> trips,
                                const PeakWindows& windows, double gap_seconds) {
  ExtractionResult out;
  FilterResult filtered = filter_records(std::move(trips));
  out.tally.filter = filtered.tally;

  for (const TripRecords& trip : filtered.trips) {
    std::vector<Candidate> candidates = detect_candidates(trip);
    out.tally.candidates += candidates.size();
    for (const EventCore& core : deduplicate(candidates, gap_seconds)) {
      NearCrashEvent ev;
      ev.device = trip.device;
      ev.trip = trip.trip;
      ev.event_time_cs = core.event_time_cs;
      ev.latitude = core.latitude;
      ev.longitude = core.longitude;
      ev.peak_decel_g = core.peak_decel_g;
      ev.severity = classify_severity(core.peak_decel_g);
      TripFeatures features = trip_features(trip, core, windows);
      ev.speed_mph = features.speed_mph;
      ev.trip_duration_min = features.trip_duration_min;
      ev.peak_hour = features.peak_hour;
      out.events.push_back(std::move(ev));
    }
  }

  std::sort(out.events.begin(), out.events.end(),
            [](const NearCrashEvent& a, const NearCrashEvent& b) {
              return std::tie(a.device, a.trip, a.event_time_cs) <
                     std::tie(b.device, b.trip, b.event_time_cs);
            });
  out.tally.events = out.events.size();
  for (const NearCrashEvent& ev : out.events) {
    if (ev.severity == Severity::kTrivial)
      ++out.tally.trivial_events;
    else
      ++out.tally.non_trivial_events;
  }
  return out;
}

}  // namespace nearcrash
