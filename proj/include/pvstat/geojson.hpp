#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "pvstat/geo.hpp"

namespace pvstat::geo {

/// Polygons of a GeoJSON Polygon or MultiPolygon geometry object. Positions
/// are (lon, lat) per RFC 7946. Throws Error(invalid_geometry) on anything
/// else.
std::vector<RegionPolygon> polygons_from_geojson(const nlohmann::json& geometry);

/// Reads a region from a file holding a Geometry, Feature or
/// FeatureCollection; all polygons found are returned as one multipolygon.
std::vector<RegionPolygon> load_region(const std::filesystem::path& path);

}  // namespace pvstat::geo
