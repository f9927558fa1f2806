#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace pvstat::geo {

/// Mean Earth radius (IUGG R1) used for every distance in the toolkit.
inline constexpr double kEarthRadiusKm = 6371.0088;
inline constexpr double kKmPerMile = 1.609344;
/// ~3958.7613 mi.
inline constexpr double kEarthRadiusMi = kEarthRadiusKm / kKmPerMile;

enum class LengthUnit { km, mi };

std::string_view to_string(LengthUnit unit) noexcept;
/// Accepts "km" or "mi"; throws Error(parameter_error) otherwise.
LengthUnit parse_length_unit(std::string_view text);
double earth_radius(LengthUnit unit) noexcept;

/// Latitude/longitude in degrees. Construction validates latitude and wraps
/// longitude into [-180, 180].
class GeoPoint {
 public:
  constexpr GeoPoint() = default;
  GeoPoint(double lat, double lon);

  double lat() const noexcept { return lat_; }
  double lon() const noexcept { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_ = 0.0;
  double lon_ = 0.0;
};

struct BoundingBox {
  double lat_min, lat_max, lon_min, lon_max;

  bool contains(const GeoPoint& p) const noexcept {
    return p.lat() >= lat_min && p.lat() <= lat_max && p.lon() >= lon_min &&
           p.lon() <= lon_max;
  }
  void expand(const BoundingBox& other) noexcept;
};

/// Polygon with an outer ring followed by zero or more hole rings. Rings are
/// implicitly closed; a trailing vertex equal to the first is dropped.
class RegionPolygon {
 public:
  using Ring = std::vector<GeoPoint>;

  /// Throws Error(invalid_geometry) if there are no rings or any ring has
  /// fewer than three distinct vertices.
  explicit RegionPolygon(std::vector<Ring> rings);

  const std::vector<Ring>& rings() const noexcept { return rings_; }
  const BoundingBox& bbox() const noexcept { return bbox_; }

 private:
  std::vector<Ring> rings_;
  BoundingBox bbox_{};
};

/// Haversine great-circle distance. Exactly symmetric in its arguments.
double geo_distance(const GeoPoint& a, const GeoPoint& b, LengthUnit unit = LengthUnit::km);

/// Even-odd ray casting in planar (lon, lat) space with bbox fast-reject.
/// Points exactly on an edge follow the half-open crossing rule and are
/// otherwise unspecified.
bool point_in_polygon(const GeoPoint& p, const RegionPolygon& poly);
/// True if any polygon of a multipolygon contains p.
bool point_in_region(const GeoPoint& p, std::span<const RegionPolygon> polys);

BoundingBox combined_bbox(std::span<const RegionPolygon> polys);

/// n points uniform by spherical area inside the region, deterministic per
/// seed. Throws Error(region_too_thin) when the rejection acceptance ratio
/// drops below 1e-4 after a warm-up of 10'000 draws, or when the bbox has no
/// extent.
std::vector<GeoPoint> sample_uniform(const RegionPolygon& region, std::size_t n,
                                     std::uint64_t seed);
std::vector<GeoPoint> sample_uniform(std::span<const RegionPolygon> region, std::size_t n,
                                     std::uint64_t seed);

/// Spherical area enclosed by a lat/lon box, in unit^2.
double lat_lon_box_area(const BoundingBox& box, LengthUnit unit);

/// Lat/lon box centred on (center_lat, center_lon) with equal angular
/// half-widths in latitude and longitude, whose spherical area is `area`
/// (in unit^2). Used as a square stand-in region for Monte Carlo baselines.
RegionPolygon square_region(double area, LengthUnit unit, double center_lat = 0.0,
                            double center_lon = 0.0);

}  // namespace pvstat::geo
