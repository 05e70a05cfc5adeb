#include <doctest.h>

#include <algorithm>
#include <random>

#include "nearcrash/errors.hpp"
#include "nearcrash/spatial.hpp"
#include "oracles.hpp"

using namespace nearcrash;
using nearcrash::testing::random_segments;
using nearcrash::testing::scan_nearest;

namespace {

RoadSegment simple_segment(std::int64_t id, std::vector<LatLon> polyline) {
  RoadSegment seg;
  seg.segment_id = id;
  seg.polyline = std::move(polyline);
  return seg;
}

NearCrashEvent event_at(double lat, double lon) {
  NearCrashEvent e;
  e.device = "D1";
  e.trip = "T1";
  e.latitude = lat;
  e.longitude = lon;
  e.peak_decel_g = -0.5;
  e.severity = Severity::kTrivial;
  return e;
}

constexpr const char* kTwoSegmentGeojson = R"({
  "type": "FeatureCollection",
  "features": [
    {"type": "Feature",
     "geometry": {"type": "LineString", "coordinates": [[-83.70, 42.30], [-83.69, 42.30]]},
     "properties": {"segment_id": 1, "f_system": 4, "access_con": "3",
                    "shoulder_width": 0, "lane_width": 12, "median_type": 2,
                    "median_width": 40, "speed_limit": 45, "aadt": 25000}},
    {"type": "Feature",
     "geometry": {"type": "LineString", "coordinates": [[-83.70, 42.31], [-83.69, 42.31]]},
     "properties": {"segment_id": 2, "f_system": 1, "access_con": "1",
                    "shoulder_width": 10, "lane_width": 13, "median_type": 4,
                    "median_width": 62, "speed_limit": 65, "aadt": 81000}}
  ]
})";

}  // namespace

TEST_CASE("point on a vertex has zero distance") {
  std::vector<LatLon> line{{42.30, -83.70}, {42.31, -83.69}};
  CHECK(point_segment_distance(LatLon{42.30, -83.70}, line) == doctest::Approx(0.0));
}

TEST_CASE("equator fixture matches the hand-derived 11.12 m") {
  // 0.0001 degrees of latitude = 0.0001 * pi/180 * 6371000 = 11.119 m.
  std::vector<LatLon> line{{0.0, 0.0}, {0.0, 0.001}};
  double d = point_segment_distance(LatLon{0.0001, 0.0005}, line);
  CHECK(d == doctest::Approx(11.12).epsilon(0.05 / 11.12));
}

TEST_CASE("a point beyond an endpoint clamps to that endpoint") {
  std::vector<LatLon> line{{0.0, 0.0}, {0.0, 0.001}};
  double beyond = point_segment_distance(LatLon{0.0, 0.002}, line);
  double at_end = point_segment_distance(LatLon{0.0, 0.002}, {{0.0, 0.001}, {0.0, 0.001}});
  CHECK(beyond == doctest::Approx(at_end).epsilon(1e-9));
}

TEST_CASE("distance is invariant under reversal and collinear midpoints") {
  std::mt19937 rng(31337);
  std::uniform_real_distribution<double> lat(42.0, 42.5);
  std::uniform_real_distribution<double> lon(-84.0, -83.5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LatLon> line{{lat(rng), lon(rng)}, {lat(rng), lon(rng)}};
    LatLon p{lat(rng), lon(rng)};
    double base = point_segment_distance(p, line);

    std::vector<LatLon> reversed(line.rbegin(), line.rend());
    CHECK(point_segment_distance(p, reversed) == doctest::Approx(base).epsilon(1e-9));

    std::vector<LatLon> with_midpoint{
        line[0],
        {(line[0].latitude + line[1].latitude) / 2.0,
         (line[0].longitude + line[1].longitude) / 2.0},
        line[1]};
    CHECK(point_segment_distance(p, with_midpoint) ==
          doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("load_segments reads a two-feature fixture with normalized levels") {
  SegmentLoadResult result = load_segments_text(kTwoSegmentGeojson);
  REQUIRE(result.segments.size() == 2);
  CHECK(result.tally.features_read == 2);
  CHECK(result.tally.invalid_geometry == 0);

  const RoadSegment& local = result.segments[0];
  CHECK(local.segment_id == 1);
  CHECK(local.functional_class == "minor arterial");
  CHECK(local.access_control == "no");
  CHECK(local.median_type == "unprotected");
  CHECK(local.shoulder_width_ft == doctest::Approx(0.0));
  CHECK(local.aadt_vpd == doctest::Approx(25000));

  const RoadSegment& freeway = result.segments[1];
  CHECK(freeway.functional_class == "interstate");
  CHECK(freeway.access_control == "yes");
  CHECK(freeway.median_type == "barrier");
}

TEST_CASE("load_segments records a missing attribute as unknown") {
  SegmentLoadResult result = load_segments_text(R"({
    "type": "FeatureCollection",
    "features": [
      {"type": "Feature",
       "geometry": {"type": "LineString", "coordinates": [[-83.7, 42.3], [-83.69, 42.3]]},
       "properties": {"segment_id": 7, "f_system": 4}}
    ]})");
  REQUIRE(result.segments.size() == 1);
  const RoadSegment& seg = result.segments[0];
  CHECK_FALSE(seg.median_width_ft.has_value());
  CHECK(seg.access_control == "unknown");
  CHECK(seg.median_type == "unknown");
}

TEST_CASE("load_segments skips degenerate geometry with a tally") {
  SegmentLoadResult result = load_segments_text(R"({
    "type": "FeatureCollection",
    "features": [
      {"type": "Feature",
       "geometry": {"type": "LineString", "coordinates": [[-83.7, 42.3]]},
       "properties": {"segment_id": 1}},
      {"type": "Feature",
       "geometry": {"type": "LineString",
                    "coordinates": [[-83.7, 42.3], [-83.7, 42.3], [-83.69, 42.3]]},
       "properties": {"segment_id": 2}}
    ]})");
  CHECK(result.tally.invalid_geometry == 1);  // the single-vertex feature
  REQUIRE(result.segments.size() == 1);
  CHECK(result.segments[0].polyline.size() == 2);  // duplicate vertex removed
}

TEST_CASE("the index answers any query when only one segment exists") {
  SpatialIndex index = SpatialIndex::build(
      {simple_segment(5, {{42.3, -83.7}, {42.3, -83.69}})});
  auto hit = index.nearest(LatLon{40.0, -80.0});
  CHECK(hit.segment->segment_id == 5);
  CHECK_THROWS_AS(SpatialIndex::build({}), ValidationError);
}

TEST_CASE("duplicate geometries with distinct ids are both retrievable") {
  std::vector<LatLon> line{{42.30, -83.70}, {42.30, -83.69}};
  SpatialIndex index =
      SpatialIndex::build({simple_segment(9, line), simple_segment(3, line)});
  auto hit = index.nearest(LatLon{42.305, -83.695});
  CHECK(hit.segment->segment_id == 3);  // exact tie: lowest id wins
  hit = index.nearest(LatLon{42.305, -83.695}, {3});
  CHECK(hit.segment->segment_id == 9);
  CHECK_THROWS_AS(index.nearest(LatLon{42.3, -83.7}, {3, 9}), LookupError);
}

TEST_CASE("query results do not depend on insertion order") {
  std::mt19937 rng(2026);
  auto segments = random_segments(rng, 120, 42.0, 42.2, -84.0, -83.8);
  SpatialIndex forward = SpatialIndex::build(segments);
  std::shuffle(segments.begin(), segments.end(), rng);
  SpatialIndex shuffled = SpatialIndex::build(segments);

  std::uniform_real_distribution<double> lat(42.0, 42.2);
  std::uniform_real_distribution<double> lon(-84.0, -83.8);
  for (int q = 0; q < 200; ++q) {
    LatLon p{lat(rng), lon(rng)};
    auto a = nearest_segment(forward, p);
    auto b = nearest_segment(shuffled, p);
    CHECK(a.segment->segment_id == b.segment->segment_id);
    CHECK(a.distance_m == b.distance_m);
  }
}

TEST_CASE("index nearest equals exhaustive scan on random fixtures") {
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> lat(42.0, 42.4);
  std::uniform_real_distribution<double> lon(-84.0, -83.6);
  auto segments = random_segments(rng, 300, 42.0, 42.4, -84.0, -83.6);
  SpatialIndex index = SpatialIndex::build(segments);

  for (int q = 0; q < 300; ++q) {
    LatLon p{lat(rng), lon(rng)};
    auto expected = scan_nearest(index.segments(), p);
    auto actual = index.nearest(p);
    CHECK(actual.segment->segment_id == expected.segment->segment_id);
    CHECK(actual.distance_m == doctest::Approx(expected.distance_m).epsilon(1e-12));
  }
}

TEST_CASE("index respects exclusions like the scan does") {
  std::mt19937 rng(555);
  auto segments = random_segments(rng, 60, 42.0, 42.2, -84.0, -83.8);
  SpatialIndex index = SpatialIndex::build(segments);
  std::set<std::int64_t> excluded{1, 5, 9, 13};
  std::uniform_real_distribution<double> lat(42.0, 42.2);
  std::uniform_real_distribution<double> lon(-84.0, -83.8);
  for (int q = 0; q < 100; ++q) {
    LatLon p{lat(rng), lon(rng)};
    auto expected = scan_nearest(index.segments(), p, excluded);
    auto actual = index.nearest(p, excluded);
    CHECK(actual.segment->segment_id == expected.segment->segment_id);
  }
}

TEST_CASE("conflate pairs events with nearest segments and gates by distance") {
  SpatialIndex index = SpatialIndex::build(
      {simple_segment(1, {{42.30, -83.70}, {42.30, -83.69}}),
       simple_segment(2, {{42.40, -83.70}, {42.40, -83.69}})});

  NearCrashEvent near = event_at(42.3000090, -83.695);  // ~1 m from segment 1
  NearCrashEvent far = event_at(42.35, -83.695);        // ~5.5 km from both
  ConflationResult result = conflate({near, far}, index, {}, 100.0);
  REQUIRE(result.conflated.size() == 1);
  CHECK(result.conflated[0].segment.segment_id == 1);
  CHECK(result.conflated[0].distance_m < 2.0);
  CHECK(result.rejected_distance == 1);

  ConflationResult empty = conflate({}, index, {}, 100.0);
  CHECK(empty.conflated.empty());
  CHECK(empty.rejected_distance == 0);
}

TEST_CASE("every conflated event is at least as close to its segment as to any other") {
  std::mt19937 rng(777);
  auto segments = random_segments(rng, 80, 42.0, 42.1, -83.8, -83.7);
  SpatialIndex index = SpatialIndex::build(segments);
  std::uniform_real_distribution<double> lat(42.0, 42.1);
  std::uniform_real_distribution<double> lon(-83.8, -83.7);

  std::vector<NearCrashEvent> events;
  for (int i = 0; i < 50; ++i) events.push_back(event_at(lat(rng), lon(rng)));
  ConflationResult result = conflate(events, index, {}, 1e9);
  REQUIRE(result.conflated.size() == events.size());
  for (const ConflatedEvent& c : result.conflated) {
    LatLon p{c.event.latitude, c.event.longitude};
    for (const RoadSegment& other : index.segments()) {
      CHECK(c.distance_m <= point_segment_distance(p, other.polyline) + 1e-9);
    }
  }
}
