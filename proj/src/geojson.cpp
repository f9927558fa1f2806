#include "pvstat/geojson.hpp"

#include <fstream>

#include <fmt/format.h>

#include "pvstat/error.hpp"

namespace pvstat::geo {

namespace {

RegionPolygon::Ring ring_from_json(const nlohmann::json& coords) {
  if (!coords.is_array()) throw Error(Errc::invalid_geometry, "ring is not an array");
  RegionPolygon::Ring ring;
  ring.reserve(coords.size());
  for (const auto& pos : coords) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
      throw Error(Errc::invalid_geometry, "position must be [lon, lat]");
    ring.emplace_back(pos[1].get<double>(), pos[0].get<double>());
  }
  return ring;
}

RegionPolygon polygon_from_json(const nlohmann::json& coords) {
  if (!coords.is_array() || coords.empty())
    throw Error(Errc::invalid_geometry, "polygon has no rings");
  std::vector<RegionPolygon::Ring> rings;
  rings.reserve(coords.size());
  for (const auto& ring : coords) rings.push_back(ring_from_json(ring));
  return RegionPolygon(std::move(rings));
}

void collect(const nlohmann::json& node, std::vector<RegionPolygon>& out) {
  const std::string type = node.value("type", "");
  if (type == "FeatureCollection") {
    for (const auto& f : node.at("features")) collect(f, out);
  } else if (type == "Feature") {
    if (node.contains("geometry") && !node["geometry"].is_null()) collect(node["geometry"], out);
  } else {
    auto polys = polygons_from_geojson(node);
    out.insert(out.end(), std::make_move_iterator(polys.begin()),
               std::make_move_iterator(polys.end()));
  }
}

}  // namespace

std::vector<RegionPolygon> polygons_from_geojson(const nlohmann::json& geometry) {
  const std::string type = geometry.value("type", "");
  const auto& coords = geometry.contains("coordinates") ? geometry["coordinates"]
                                                         : nlohmann::json::array();
  std::vector<RegionPolygon> out;
  if (type == "Polygon") {
    out.push_back(polygon_from_json(coords));
  } else if (type == "MultiPolygon") {
    for (const auto& poly : coords) out.push_back(polygon_from_json(poly));
  } else {
    throw Error(Errc::invalid_geometry, fmt::format("unsupported geometry type '{}'", type));
  }
  return out;
}

std::vector<RegionPolygon> load_region(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, fmt::format("cannot open {}", path.string()));
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_geometry, fmt::format("{}: {}", path.string(), e.what()));
  }
  std::vector<RegionPolygon> out;
  collect(doc, out);
  if (out.empty()) throw Error(Errc::invalid_geometry, path.string() + ": no polygons found");
  return out;
}

}  // namespace pvstat::geo
