#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nearcrash/events.hpp"

namespace nearcrash {

inline constexpr double kEarthRadiusMeters = 6'371'000.0;
inline constexpr double kDefaultMaxConflationDistanceM = 100.0;

struct LatLon {
  double latitude = 0.0;
  double longitude = 0.0;
};

/// Minimum distance in meters from point `p` to the polyline, measured in a
/// local equirectangular projection centered at `p` (meters east =
/// dlon * cos(lat_p) * R * pi/180, meters north = dlat * R * pi/180), with
/// the perpendicular foot clamped to each edge.
double point_segment_distance(const LatLon& p, const std::vector<LatLon>& polyline);

/// A road segment: a polyline plus inventory attributes. Categorical
/// attributes are normalized level strings; "unknown" stands for a missing
/// value. Numeric attributes are absent when missing.
struct RoadSegment {
  std::int64_t segment_id = 0;
  std::vector<LatLon> polyline;  // >= 2 vertices, consecutive duplicates removed
  std::string functional_class = "unknown";  // interstate, minor arterial, ...
  std::string access_control = "unknown";    // yes / no
  std::string median_type = "unknown";       // barrier / curbed / unprotected / none
  std::optional<double> shoulder_width_ft;
  std::optional<double> lane_width_ft;
  std::optional<double> median_width_ft;
  std::optional<double> speed_limit_mph;
  std::optional<double> aadt_vpd;
};

struct SegmentLoadTally {
  std::size_t features_read = 0;
  std::size_t invalid_geometry = 0;  // skipped: not a usable line
  std::size_t missing_id = 0;        // skipped: no segment_id/id property
};

struct SegmentLoadResult {
  std::vector<RoadSegment> segments;
  SegmentLoadTally tally;
};

/// Loads road segments from a GeoJSON-style FeatureCollection: LineString
/// features whose properties carry the inventory attributes (segment_id,
/// f_system, access_con, shoulder_width, lane_width, median_type,
/// median_width, speed_limit, aadt). Missing attributes load as "unknown";
/// degenerate geometries are skipped and tallied.
SegmentLoadResult load_segments(const std::filesystem::path& path);
SegmentLoadResult load_segments_text(std::string_view geojson);

/// Plain-text exclusion list: one segment_id per line, '#' comments allowed.
std::set<std::int64_t> load_exclusion_list(const std::filesystem::path& path);

/// Immutable bounding-box tree over segment envelopes. Nearest queries are
/// exact: results match an exhaustive scan, with distance ties broken by the
/// lowest segment id.
class SpatialIndex {
 public:
  /// Bulk-loads the index. Throws ValidationError on an empty segment set.
  static SpatialIndex build(std::vector<RoadSegment> segments);

  struct Hit {
    const RoadSegment* segment = nullptr;
    double distance_m = 0.0;
  };

  /// Nearest non-excluded segment to `p`. Throws LookupError when every
  /// segment is excluded.
  Hit nearest(const LatLon& p, const std::set<std::int64_t>& excluded = {}) const;

  const std::vector<RoadSegment>& segments() const { return segments_; }

 private:
  struct Box {
    double lat_lo = 0.0, lat_hi = 0.0, lon_lo = 0.0, lon_hi = 0.0;
  };
  struct Node {
    Box box;
    std::int32_t left = -1;   // inner nodes
    std::int32_t right = -1;
    std::int32_t first = 0;   // leaf nodes: range into leaf_entries_
    std::int32_t count = 0;
    bool leaf = false;
  };

  SpatialIndex() = default;
  std::int32_t build_node(std::vector<std::int32_t>& ids, std::int32_t lo,
                          std::int32_t hi, int axis);
  void query(std::int32_t node_index, const LatLon& p, double k_lat, double k_lon,
             const std::set<std::int64_t>& excluded, Hit& best) const;

  std::vector<RoadSegment> segments_;
  std::vector<Box> envelopes_;      // parallel to segments_
  std::vector<Node> nodes_;
  std::vector<std::int32_t> leaf_entries_;
  std::int32_t root_ = -1;
};

/// Free-function form of SpatialIndex::nearest.
SpatialIndex::Hit nearest_segment(const SpatialIndex& index, const LatLon& p,
                                  const std::set<std::int64_t>& excluded = {});

/// A near-crash event carrying the attributes of its nearest road segment.
struct ConflatedEvent {
  NearCrashEvent event;
  RoadSegment segment;
  double distance_m = 0.0;
};

struct ConflationResult {
  std::vector<ConflatedEvent> conflated;
  std::size_t rejected_distance = 0;  // beyond max_distance_m
};

/// Pairs each event with its nearest non-excluded segment; events farther
/// than max_distance_m from every segment are rejected and tallied (guards
/// against overpass-style misconflation).
ConflationResult conflate(const std::vector<NearCrashEvent>& events,
                          const SpatialIndex& index,
                          const std::set<std::int64_t>& excluded = {},
                          double max_distance_m = kDefaultMaxConflationDistanceM);

}  // namespace nearcrash
