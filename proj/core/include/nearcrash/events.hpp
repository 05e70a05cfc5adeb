#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace nearcrash {

// Unit conversions and thresholds, fixed for the whole pipeline.
inline constexpr double kStandardGravity = 9.80665;  // m/s^2 per g
inline constexpr double kMpsToMph = 2.23694;
inline constexpr double kFeetToMeters = 0.3048;
inline constexpr double kDetectionThresholdG = -0.45;   // at or below = near-crash
inline constexpr double kSeverityThresholdG = -0.75;    // at or below = non-trivial
inline constexpr double kMaxLeadRangeMeters = 50.0 * kFeetToMeters;  // 15.24 m
inline constexpr std::int64_t kMinTripDurationCs = 60'000;           // 10 minutes
inline constexpr double kDefaultDedupGapSeconds = 180.0;

/// Converts longitudinal acceleration from m/s^2 to g units.
/// Throws ValidationError for non-finite input.
double accel_to_g(double accel_mps2);

/// A local wall-clock instant with no time zone attached. Trip-start
/// timestamps are interpreted as local time and never converted.
struct LocalTime {
  int year = 1970;
  int month = 1;  // 1-12
  int day = 1;    // 1-31
  int hour = 0;
  int minute = 0;
  int second = 0;

  /// Parses "YYYY-MM-DD HH:MM[:SS]" (a 'T' separator is also accepted).
  static std::optional<LocalTime> parse(std::string_view text);

  /// 0 = Sunday ... 6 = Saturday.
  int weekday() const;
  bool is_weekday() const;
  int minute_of_day() const { return hour * 60 + minute; }

  LocalTime plus_seconds(std::int64_t seconds) const;
  std::string to_string() const;
};

/// Peak-hour windows, applied on weekdays only. Each window is a
/// [begin, end) range in minutes of the local day.
struct PeakWindows {
  struct Window {
    int begin_minute = 0;
    int end_minute = 0;
  };
  std::vector<Window> windows;

  /// Weekday 07:00-09:00 and 16:00-18:00.
  static PeakWindows defaults();

  /// Parses "HH:MM-HH:MM[,HH:MM-HH:MM...]". Throws ValidationError on
  /// malformed input or empty/backwards windows.
  static PeakWindows parse(std::string_view text);

  bool is_peak(const LocalTime& t) const;
  std::string to_string() const;
};

/// One timestamped sample of a vehicle's state.
struct TrajectoryRecord {
  std::int64_t time_cs = 0;  // centiseconds since trip start
  double latitude = 0.0;
  double longitude = 0.0;
  double speed_mps = 0.0;
  double accel_mps2 = 0.0;  // longitudinal; negative = deceleration
  bool cipv = false;        // a lead vehicle is closest-in-path
  std::optional<double> range_m;         // distance to lead vehicle
  std::optional<std::string> target_type;  // lowercased when present
};

/// All records of one (device, trip) stream, sorted by time.
struct TripRecords {
  std::string device;
  std::string trip;
  std::vector<TrajectoryRecord> records;
  std::optional<LocalTime> trip_start;  // wall clock at time_cs = 0
  std::int64_t duration_cs = 0;         // span of the parsed trip
};

struct ParseTally {
  std::size_t rows_read = 0;
  std::size_t rows_malformed = 0;
  std::size_t unmatched_target_rows = 0;  // two-file layout only
};

struct ParseResult {
  std::vector<TripRecords> trips;  // sorted by (device, trip)
  ParseTally tally;
};

/// Reads a pre-joined trajectory file (state and lead-vehicle columns in
/// one table). Throws IoError / ParseError.
ParseResult parse_trajectory(const std::filesystem::path& joined);
/// Two-file layout: vehicle-state stream plus front-target stream, joined
/// on (Device, Trip, Time).
ParseResult parse_trajectory(const std::filesystem::path& state,
                             const std::filesystem::path& front_targets);

/// Stream-based variants used by the file overloads and by tests.
ParseResult parse_trajectory_stream(std::istream& joined);
ParseResult parse_trajectory_stream(std::istream& state, std::istream& front_targets);

struct FilterTally {
  std::size_t trips_in = 0;
  std::size_t trips_short = 0;
  std::size_t records_in = 0;
  std::size_t records_in_short_trips = 0;
  std::size_t cipv_excluded = 0;
  std::size_t target_type_excluded = 0;
  std::size_t range_excluded = 0;
  std::size_t records_kept = 0;
};

struct FilterResult {
  std::vector<TripRecords> trips;
  FilterTally tally;
};

/// Applies the exclusion criteria: (a) drops whole trips spanning less than
/// kMinTripDurationCs, (b) drops records without a closest-in-path vehicle,
/// then records whose target is a pedestrian or bicycle, then (c) records
/// with lead range above kMaxLeadRangeMeters. Trip duration is measured on
/// the parsed trip, before any record-level exclusion.
FilterResult filter_records(std::vector<TripRecords> trips);

/// One hard-braking sample.
struct Candidate {
  std::int64_t time_cs = 0;
  double accel_g = 0.0;
  TrajectoryRecord record;
};

/// Every sample with acceleration at or below the detection threshold,
/// in time order.
std::vector<Candidate> detect_candidates(const TripRecords& trip);

enum class Severity { kTrivial, kNonTrivial };

std::string to_string(Severity s);  // "trivial" / "non-trivial"
std::optional<Severity> parse_severity(std::string_view s);

/// non-trivial at or below the -0.75 g boundary, trivial otherwise.
/// Throws ValidationError when the input is above the detection threshold.
Severity classify_severity(double peak_decel_g);

/// A deduplicated braking incident, located at its peak-deceleration sample.
struct EventCore {
  std::int64_t event_time_cs = 0;
  double latitude = 0.0;
  double longitude = 0.0;
  double peak_decel_g = 0.0;
  double peak_speed_mps = 0.0;
};

/// Greedy single-pass clustering: a candidate starts a new event iff it is
/// more than `gap_seconds` after the previous candidate. Equal peaks within
/// a cluster resolve to the earliest sample.
std::vector<EventCore> deduplicate(const std::vector<Candidate>& candidates,
                                   double gap_seconds = kDefaultDedupGapSeconds);

enum class PeakFlag { kNo, kYes, kUnknown };

std::string to_string(PeakFlag f);  // "no" / "yes" / "unknown"
std::optional<PeakFlag> parse_peak_flag(std::string_view s);

struct TripFeatures {
  double speed_mph = 0.0;
  double trip_duration_min = 0.0;
  PeakFlag peak_hour = PeakFlag::kUnknown;
};

/// Speed at the peak sample in mph, whole-trip duration in minutes, and the
/// peak-hour flag from the trip's wall-clock start (kUnknown when the trip
/// carries no start timestamp).
TripFeatures trip_features(const TripRecords& trip, const EventCore& event,
                           const PeakWindows& windows);

/// A near-crash event with severity label, location and trip features.
struct NearCrashEvent {
  std::string device;
  std::string trip;
  std::int64_t event_time_cs = 0;
  double latitude = 0.0;
  double longitude = 0.0;
  double peak_decel_g = 0.0;
  Severity severity = Severity::kTrivial;
  double speed_mph = 0.0;
  double trip_duration_min = 0.0;
  PeakFlag peak_hour = PeakFlag::kUnknown;
};

struct ExtractionTally {
  FilterTally filter;
  std::size_t candidates = 0;
  std::size_t events = 0;
  std::size_t trivial_events = 0;
  std::size_t non_trivial_events = 0;
};

struct ExtractionResult {
  std::vector<NearCrashEvent> events;  // sorted by (device, trip, event_time)
  ExtractionTally tally;
};

/// Runs filter -> detect -> deduplicate -> classify -> trip features over
/// parsed trips. Output order is normalized so serial and parallel callers
/// see identical results.
ExtractionResult extract_events(std::vector<TripRecords> trips,
                                const PeakWindows& windows = PeakWindows::defaults(),
                                double gap_seconds = kDefaultDedupGapSeconds);

}  // namespace nearcrash
