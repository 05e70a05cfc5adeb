#include "nearcrash/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "nearcrash/errors.hpp"
#include "nearcrash/textio.hpp"

namespace nearcrash {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr std::int32_t kLeafCapacity = 8;

}  // namespace

double point_segment_distance(const LatLon& p, const std::vector<LatLon>& polyline) {
  if (polyline.empty())
    throw ValidationError("point_segment_distance: empty polyline");
  const double k_lat = kEarthRadiusMeters * kDegToRad;
  const double k_lon = k_lat * std::cos(p.latitude * kDegToRad);

  auto px = [&](const LatLon& v) { return (v.longitude - p.longitude) * k_lon; };
  auto py = [&](const LatLon& v) { return (v.latitude - p.latitude) * k_lat; };

  double best_sq = std::numeric_limits<double>::infinity();
  double ax = px(polyline[0]), ay = py(polyline[0]);
  if (polyline.size() == 1) return std::sqrt(ax * ax + ay * ay);
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const double bx = px(polyline[i]), by = py(polyline[i]);
    const double dx = bx - ax, dy = by - ay;
    const double len_sq = dx * dx + dy * dy;
    double t = 0.0;
    if (len_sq > 0.0) t = std::clamp(-(ax * dx + ay * dy) / len_sq, 0.0, 1.0);
    const double cx = ax + t * dx, cy = ay + t * dy;
    best_sq = std::min(best_sq, cx * cx + cy * cy);
    ax = bx;
    ay = by;
  }
  return std::sqrt(best_sq);
}

namespace {

using nlohmann::json;

std::optional<json> property(const json& props, std::initializer_list<const char*> names) {
  if (!props.is_object()) return std::nullopt;
  for (const char* name : names) {
    auto it = props.find(name);
    if (it != props.end() && !it->is_null()) return *it;
  }
  return std::nullopt;
}

std::optional<double> numeric_property(const json& props,
                                       std::initializer_list<const char*> names) {
  auto v = property(props, names);
  if (!v) return std::nullopt;
  if (v->is_number()) return v->get<double>();
  if (v->is_string()) return parse_double(v->get<std::string>());
  return std::nullopt;
}

std::optional<std::string> text_property(const json& props,
                                         std::initializer_list<const char*> names) {
  auto v = property(props, names);
  if (!v) return std::nullopt;
  if (v->is_string()) {
    std::string s = to_lower(trim(v->get<std::string>()));
    if (s.empty()) return std::nullopt;
    return s;
  }
  if (v->is_number_integer()) return std::to_string(v->get<std::int64_t>());
  if (v->is_number()) return std::to_string(v->get<double>());
  return std::nullopt;
}

// HPMS functional-class codes; string labels pass through.
std::string normalize_functional_class(const std::optional<std::string>& raw) {
  if (!raw) return "unknown";
  const std::string& s = *raw;
  if (s == "1") return "interstate";
  if (s == "2" || s == "3") return "principal arterial";
  if (s == "4") return "minor arterial";
  if (s == "5") return "major collector";
  if (s == "6") return "minor collector";
  if (s == "7") return "local";
  return s;
}

// HPMS access-control codes: 1 full, 2 partial, 3 none.
std::string normalize_access_control(const std::optional<std::string>& raw) {
  if (!raw) return "unknown";
  const std::string& s = *raw;
  if (s == "1" || s == "2" || s == "y" || s == "yes") return "yes";
  if (s == "3" || s == "n" || s == "no" || s == "none") return "no";
  return s;
}

// HPMS median-type codes: 1 none, 2 unprotected, 3 curbed, 4-7 barrier kinds.
std::string normalize_median_type(const std::optional<std::string>& raw) {
  if (!raw) return "unknown";
  const std::string& s = *raw;
  if (s == "1" || s == "none") return "none";
  if (s == "2" || s == "unprotected") return "unprotected";
  if (s == "3" || s == "curbed") return "curbed";
  if (s == "4" || s == "5" || s == "6" || s == "7" || s == "barrier") return "barrier";
  return s;
}

std::optional<double> nonnegative(std::optional<double> v) {
  if (v && (*v < 0.0 || !std::isfinite(*v))) return std::nullopt;
  return v;
}

std::optional<double> positive(std::optional<double> v) {
  if (v && (*v <= 0.0 || !std::isfinite(*v))) return std::nullopt;
  return v;
}

bool read_polyline(const json& geometry, std::vector<LatLon>& out) {
  if (!geometry.is_object() || geometry.value("type", "") != "LineString") return false;
  auto coords = geometry.find("coordinates");
  if (coords == geometry.end() || !coords->is_array()) return false;
  out.clear();
  for (const json& pt : *coords) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number())
      return false;
    LatLon v{pt[1].get<double>(), pt[0].get<double>()};  // GeoJSON is [lon, lat]
    if (v.latitude < -90.0 || v.latitude > 90.0 || v.longitude < -180.0 ||
        v.longitude > 180.0)
      return false;
    if (!out.empty() && out.back().latitude == v.latitude &&
        out.back().longitude == v.longitude)
      continue;  // drop consecutive duplicates
    out.push_back(v);
  }
  return out.size() >= 2;
}

}  // namespace

SegmentLoadResult load_segments_text(std::string_view geojson) {
  json doc;
  try {
    doc = json::parse(geojson);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("segment file: ") + e.what());
  }
  const json* features = nullptr;
  if (doc.is_object() && doc.value("type", "") == "FeatureCollection" &&
      doc.contains("features") && doc["features"].is_array()) {
    features = &doc["features"];
  } else {
    throw ParseError("segment file: expected a FeatureCollection with a features array");
  }

  SegmentLoadResult out;
  for (const json& feature : *features) {
    ++out.tally.features_read;
    const json props = feature.is_object() && feature.contains("properties")
                           ? feature["properties"]
                           : json::object();

    RoadSegment seg;
    std::optional<double> id = numeric_property(props, {"segment_id", "id"});
    if (!id && feature.is_object() && feature.contains("id") &&
        feature["id"].is_number())
      id = feature["id"].get<double>();
    if (!id) {
      ++out.tally.missing_id;
      continue;
    }
    seg.segment_id = static_cast<std::int64_t>(*id);

    if (!feature.is_object() || !feature.contains("geometry") ||
        !read_polyline(feature["geometry"], seg.polyline)) {
      ++out.tally.invalid_geometry;
      continue;
    }

    seg.functional_class =
        normalize_functional_class(text_property(props, {"f_system", "functional_class"}));
    seg.access_control =
        normalize_access_control(text_property(props, {"access_con", "access_control"}));
    seg.median_type = normalize_median_type(text_property(props, {"median_type"}));
    seg.shoulder_width_ft = nonnegative(numeric_property(props, {"shoulder_width"}));
    seg.lane_width_ft = nonnegative(numeric_property(props, {"lane_width"}));
    seg.median_width_ft = nonnegative(numeric_property(props, {"median_width"}));
    seg.speed_limit_mph = positive(numeric_property(props, {"speed_limit"}));
    seg.aadt_vpd = nonnegative(numeric_property(props, {"aadt"}));
    out.segments.push_back(std::move(seg));
  }
  return out;
}

SegmentLoadResult load_segments(const std::filesystem::path& path) {
  return load_segments_text(read_file(path));
}

std::set<std::int64_t> load_exclusion_list(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::set<std::int64_t> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::string_view body = trim(line);
    auto hash = body.find('#');
    if (hash != std::string_view::npos) body = trim(body.substr(0, hash));
    if (body.empty()) continue;
    auto id = parse_int(body);
    if (!id)
      throw ParseError("exclusion list row " + std::to_string(row) +
                           ": expected a segment id, got '" + std::string(body) + "'",
                       row);
    out.insert(*id);
  }
  return out;
}

SpatialIndex SpatialIndex::build(std::vector<RoadSegment> segments) {
  if (segments.empty())
    throw ValidationError("SpatialIndex: cannot build over an empty segment set");
  std::sort(segments.begin(), segments.end(),
            [](const RoadSegment& a, const RoadSegment& b) {
              return a.segment_id < b.segment_id;
            });
  for (std::size_t i = 1; i < segments.size(); ++i) {
    if (segments[i].segment_id == segments[i - 1].segment_id)
      throw ValidationError("SpatialIndex: duplicate segment_id " +
                            std::to_string(segments[i].segment_id));
  }

  SpatialIndex index;
  index.segments_ = std::move(segments);
  index.envelopes_.reserve(index.segments_.size());
  for (const RoadSegment& seg : index.segments_) {
    if (seg.polyline.size() < 2)
      throw ValidationError("SpatialIndex: segment " + std::to_string(seg.segment_id) +
                            " has fewer than 2 vertices");
    Box box{seg.polyline[0].latitude, seg.polyline[0].latitude,
            seg.polyline[0].longitude, seg.polyline[0].longitude};
    for (const LatLon& v : seg.polyline) {
      box.lat_lo = std::min(box.lat_lo, v.latitude);
      box.lat_hi = std::max(box.lat_hi, v.latitude);
      box.lon_lo = std::min(box.lon_lo, v.longitude);
      box.lon_hi = std::max(box.lon_hi, v.longitude);
    }
    index.envelopes_.push_back(box);
  }

  std::vector<std::int32_t> ids(index.segments_.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int32_t>(i);
  index.root_ = index.build_node(ids, 0, static_cast<std::int32_t>(ids.size()), 0);
  return index;
}

std::int32_t SpatialIndex::build_node(std::vector<std::int32_t>& ids, std::int32_t lo,
                                      std::int32_t hi, int axis) {
  Node node;
  node.box = envelopes_[ids[lo]];
  for (std::int32_t i = lo; i < hi; ++i) {
    const Box& b = envelopes_[ids[i]];
    node.box.lat_lo = std::min(node.box.lat_lo, b.lat_lo);
    node.box.lat_hi = std::max(node.box.lat_hi, b.lat_hi);
    node.box.lon_lo = std::min(node.box.lon_lo, b.lon_lo);
    node.box.lon_hi = std::max(node.box.lon_hi, b.lon_hi);
  }

  if (hi - lo <= kLeafCapacity) {
    node.leaf = true;
    node.first = static_cast<std::int32_t>(leaf_entries_.size());
    node.count = hi - lo;
    for (std::int32_t i = lo; i < hi; ++i) leaf_entries_.push_back(ids[i]);
    nodes_.push_back(node);
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  auto center = [&](std::int32_t id) {
    const Box& b = envelopes_[id];
    return axis == 0 ? (b.lon_lo + b.lon_hi) : (b.lat_lo + b.lat_hi);
  };
  const std::int32_t mid = lo + (hi - lo) / 2;
  std::nth_element(ids.begin() + lo, ids.begin() + mid, ids.begin() + hi,
                   [&](std::int32_t a, std::int32_t b) {
                     double ca = center(a), cb = center(b);
                     if (ca != cb) return ca < cb;
                     return a < b;  // deterministic split on ties
                   });

  node.left = build_node(ids, lo, mid, axis ^ 1);
  node.right = build_node(ids, mid, hi, axis ^ 1);
  nodes_.push_back(node);
  return static_cast<std::int32_t>(nodes_.size() - 1);
}

namespace {

// Lower bound on the projected distance from p to anything inside the box.
// The projection is affine in latitude and longitude, so the box maps to an
// axis-aligned rectangle that contains the segment.
double box_distance(const LatLon& p, double k_lat, double k_lon, double lat_lo,
                    double lat_hi, double lon_lo, double lon_hi) {
  double dlat = 0.0;
  if (p.latitude < lat_lo)
    dlat = lat_lo - p.latitude;
  else if (p.latitude > lat_hi)
    dlat = p.latitude - lat_hi;
  double dlon = 0.0;
  if (p.longitude < lon_lo)
    dlon = lon_lo - p.longitude;
  else if (p.longitude > lon_hi)
    dlon = p.longitude - lon_hi;
  const double x = dlon * k_lon, y = dlat * k_lat;
  return std::sqrt(x * x + y * y);
}

}  // namespace

void SpatialIndex::query(std::int32_t node_index, const LatLon& p, double k_lat,
                         double k_lon, const std::set<std::int64_t>& excluded,
                         Hit& best) const {
  const Node& node = nodes_[node_index];
  if (node.leaf) {
    for (std::int32_t i = node.first; i < node.first + node.count; ++i) {
      const RoadSegment& seg = segments_[leaf_entries_[i]];
      if (excluded.count(seg.segment_id)) continue;
      const double d = point_segment_distance(p, seg.polyline);
      if (d < best.distance_m ||
          (best.segment && d == best.distance_m &&
           seg.segment_id < best.segment->segment_id)) {
        best.segment = &seg;
        best.distance_m = d;
      }
    }
    return;
  }

  const Node& l = nodes_[node.left];
  const Node& r = nodes_[node.right];
  const double dl = box_distance(p, k_lat, k_lon, l.box.lat_lo, l.box.lat_hi,
                                 l.box.lon_lo, l.box.lon_hi);
  const double dr = box_distance(p, k_lat, k_lon, r.box.lat_lo, r.box.lat_hi,
                                 r.box.lon_lo, r.box.lon_hi);
  // Visit the nearer child first; equal-distance candidates with lower ids
  // may hide behind an equal bound, so prune only on strictly greater.
  const std::int32_t first = dl <= dr ? node.left : node.right;
  const std::int32_t second = dl <= dr ? node.right : node.left;
  const double dfirst = std::min(dl, dr), dsecond = std::max(dl, dr);
  if (dfirst <= best.distance_m) query(first, p, k_lat, k_lon, excluded, best);
  if (dsecond <= best.distance_m) query(second, p, k_lat, k_lon, excluded, best);
}

SpatialIndex::Hit SpatialIndex::nearest(const LatLon& p,
                                        const std::set<std::int64_t>& excluded) const {
  Hit best;
  best.distance_m = std::numeric_limits<double>::infinity();
  const double k_lat = kEarthRadiusMeters * kDegToRad;
  const double k_lon = k_lat * std::cos(p.latitude * kDegToRad);
  query(root_, p, k_lat, k_lon, excluded, best);
  if (!best.segment)
    throw LookupError("nearest_segment: every segment is excluded");
  return best;
}

SpatialIndex::Hit nearest_segment(const SpatialIndex& index, const LatLon& p,
                                  const std::set<std::int64_t>& excluded) {
  return index.nearest(p, excluded);
}

ConflationResult conflate(const std::vector<NearCrashEvent>& events,
                          const SpatialIndex& index,
                          const std::set<std::int64_t>& excluded,
                          double max_distance_m) {
  ConflationResult out;
  for (const NearCrashEvent& event : events) {
    SpatialIndex::Hit hit = index.nearest(LatLon{event.latitude, event.longitude}, excluded);
    if (hit.distance_m > max_distance_m) {
      ++out.rejected_distance;
      continue;
    }
    out.conflated.push_back(ConflatedEvent{event, *hit.segment, hit.distance_m});
  }
  return out;
}

}  // namespace nearcrash
