#include "pvstat/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "pvstat/error.hpp"
#include "pvstat/random.hpp"

namespace pvstat::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

constexpr std::uint64_t kWarmupDraws = 10'000;
constexpr double kMinAcceptance = 1e-4;

double wrap_longitude(double lon) {
  if (lon >= -180.0 && lon <= 180.0) return lon;
  double wrapped = std::fmod(lon + 180.0, 360.0);
  if (wrapped < 0) wrapped += 360.0;
  return wrapped - 180.0;
}

bool ring_contains(const RegionPolygon::Ring& ring, double x, double y) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double xi = ring[i].lon(), yi = ring[i].lat();
    const double xj = ring[j].lon(), yj = ring[j].lat();
    if ((yi > y) != (yj > y)) {
      const double x_cross = xj + (y - yj) * (xi - xj) / (yi - yj);
      if (x < x_cross) inside = !inside;
    }
  }
  return inside;
}

template <class Contains>
std::vector<GeoPoint> sample_in_box(const BoundingBox& box, std::size_t n, std::uint64_t seed,
                                    Contains&& contains) {
  std::vector<GeoPoint> out;
  if (n == 0) return out;
  if (!(box.lat_max > box.lat_min) || !(box.lon_max > box.lon_min))
    throw Error(Errc::region_too_thin, "region bounding box has zero extent");

  out.reserve(n);
  Engine rng(seed);
  const double s_lo = std::sin(box.lat_min * kDegToRad);
  const double s_hi = std::sin(box.lat_max * kDegToRad);
  std::uint64_t draws = 0;
  std::uint64_t accepted = 0;
  while (out.size() < n) {
    const double lon = uniform(rng, box.lon_min, box.lon_max);
    const double s = std::clamp(uniform(rng, s_lo, s_hi), -1.0, 1.0);
    const double lat = std::clamp(std::asin(s) / kDegToRad, box.lat_min, box.lat_max);
    ++draws;
    GeoPoint p(lat, lon);
    if (contains(p)) {
      ++accepted;
      out.push_back(p);
    }
    if (draws >= kWarmupDraws &&
        static_cast<double>(accepted) < kMinAcceptance * static_cast<double>(draws)) {
      throw Error(Errc::region_too_thin,
                  fmt::format("rejection sampling accepted {} of {} draws", accepted, draws));
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(LengthUnit unit) noexcept {
  return unit == LengthUnit::km ? "km" : "mi";
}

LengthUnit parse_length_unit(std::string_view text) {
  if (text == "km") return LengthUnit::km;
  if (text == "mi") return LengthUnit::mi;
  throw Error(Errc::parameter_error, fmt::format("unknown length unit '{}'", text));
}

double earth_radius(LengthUnit unit) noexcept {
  return unit == LengthUnit::km ? kEarthRadiusKm : kEarthRadiusMi;
}

GeoPoint::GeoPoint(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0)
    throw Error(Errc::invalid_geometry, fmt::format("invalid coordinate ({}, {})", lat, lon));
  lat_ = lat;
  lon_ = wrap_longitude(lon);
}

void BoundingBox::expand(const BoundingBox& other) noexcept {
  lat_min = std::min(lat_min, other.lat_min);
  lat_max = std::max(lat_max, other.lat_max);
  lon_min = std::min(lon_min, other.lon_min);
  lon_max = std::max(lon_max, other.lon_max);
}

RegionPolygon::RegionPolygon(std::vector<Ring> rings) : rings_(std::move(rings)) {
  if (rings_.empty()) throw Error(Errc::invalid_geometry, "polygon has no rings");
  bbox_ = {90.0, -90.0, 180.0, -180.0};
  for (auto& ring : rings_) {
    if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
    std::vector<GeoPoint> distinct = ring;
    std::sort(distinct.begin(), distinct.end(), [](const GeoPoint& a, const GeoPoint& b) {
      return a.lat() != b.lat() ? a.lat() < b.lat() : a.lon() < b.lon();
    });
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3)
      throw Error(Errc::invalid_geometry,
                  fmt::format("ring has {} distinct vertices, need at least 3", distinct.size()));
    for (const auto& p : ring) bbox_.expand({p.lat(), p.lat(), p.lon(), p.lon()});
  }
}

double geo_distance(const GeoPoint& a, const GeoPoint& b, LengthUnit unit) {
  // Canonical argument order makes the result bit-for-bit symmetric.
  const bool swap = a.lat() > b.lat() || (a.lat() == b.lat() && a.lon() > b.lon());
  const GeoPoint& p = swap ? b : a;
  const GeoPoint& q = swap ? a : b;
  const double lat1 = p.lat() * kDegToRad, lat2 = q.lat() * kDegToRad;
  const double dlat = lat2 - lat1;
  const double dlon = (q.lon() - p.lon()) * kDegToRad;
  const double s1 = std::sin(dlat / 2), s2 = std::sin(dlon / 2);
  const double h = std::clamp(s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2, 0.0, 1.0);
  return 2.0 * earth_radius(unit) * std::asin(std::sqrt(h));
}

bool point_in_polygon(const GeoPoint& p, const RegionPolygon& poly) {
  if (!poly.bbox().contains(p)) return false;
  bool inside = false;
  for (const auto& ring : poly.rings())
    if (ring_contains(ring, p.lon(), p.lat())) inside = !inside;
  return inside;
}

bool point_in_region(const GeoPoint& p, std::span<const RegionPolygon> polys) {
  return std::any_of(polys.begin(), polys.end(),
                     [&](const RegionPolygon& poly) { return point_in_polygon(p, poly); });
}

BoundingBox combined_bbox(std::span<const RegionPolygon> polys) {
  if (polys.empty()) throw Error(Errc::invalid_geometry, "empty region");
  BoundingBox box = polys.front().bbox();
  for (const auto& poly : polys.subspan(1)) box.expand(poly.bbox());
  return box;
}

std::vector<GeoPoint> sample_uniform(const RegionPolygon& region, std::size_t n,
                                     std::uint64_t seed) {
  return sample_in_box(region.bbox(), n, seed,
                       [&](const GeoPoint& p) { return point_in_polygon(p, region); });
}

std::vector<GeoPoint> sample_uniform(std::span<const RegionPolygon> region, std::size_t n,
                                     std::uint64_t seed) {
  return sample_in_box(combined_bbox(region), n, seed,
                       [&](const GeoPoint& p) { return point_in_region(p, region); });
}

double lat_lon_box_area(const BoundingBox& box, LengthUnit unit) {
  const double r = earth_radius(unit);
  return r * r * (box.lon_max - box.lon_min) * kDegToRad *
         (std::sin(box.lat_max * kDegToRad) - std::sin(box.lat_min * kDegToRad));
}

RegionPolygon square_region(double area, LengthUnit unit, double center_lat, double center_lon) {
  if (!(area > 0)) throw Error(Errc::domain_error, "square_region: area must be positive");
  auto box_for = [&](double half) {
    return BoundingBox{center_lat - half, center_lat + half, center_lon - half,
                       center_lon + half};
  };
  double lo = 0.0;
  double hi = std::min(90.0 - std::abs(center_lat), 180.0 - std::abs(center_lon));
  if (lat_lon_box_area(box_for(hi), unit) < area)
    throw Error(Errc::domain_error, "square_region: area does not fit on the sphere");
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (lat_lon_box_area(box_for(mid), unit) < area ? lo : hi) = mid;
  }
  const BoundingBox b = box_for(0.5 * (lo + hi));
  return RegionPolygon({{GeoPoint(b.lat_min, b.lon_min), GeoPoint(b.lat_min, b.lon_max),
                         GeoPoint(b.lat_max, b.lon_max), GeoPoint(b.lat_max, b.lon_min)}});
}

}  // namespace pvstat::geo
