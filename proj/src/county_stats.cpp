#include "pvstat/county_stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pvstat/csv.hpp"
#include "pvstat/error.hpp"
#include "pvstat/geojson.hpp"
#include "pvstat/parallel.hpp"

namespace pvstat::county {

namespace {

std::string normalize_name(std::string_view name) {
  std::string s;
  s.reserve(name.size());
  for (unsigned char c : name) s += static_cast<char>(std::tolower(c));
  while (!s.empty() && s.back() == ' ') s.pop_back();
  for (std::string_view suffix : {" county", " parish"}) {
    if (s.size() > suffix.size() && s.ends_with(suffix)) {
      s.resize(s.size() - suffix.size());
      break;
    }
  }
  return s;
}

std::string normalize_fips(std::string_view raw) {
  std::string s(raw);
  if (!s.empty() && s.size() < 5 &&
      std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
    s.insert(0, 5 - s.size(), '0');
  return s;
}

std::string property_string(const nlohmann::json& props, const char* key) {
  if (!props.contains(key) || props[key].is_null()) return {};
  const auto& v = props[key];
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

CountyBoundary make_boundary(std::string fips, std::string name, std::string state,
                             std::vector<geo::RegionPolygon> geometry) {
  if (fips.size() != 5 ||
      !std::all_of(fips.begin(), fips.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw Error(Errc::invalid_geometry, fmt::format("FIPS code '{}' is not 5 digits", fips));
  if (geometry.empty())
    throw Error(Errc::invalid_geometry, fmt::format("county {} has no geometry", fips));
  CountyBoundary b{std::move(fips), std::move(name), std::move(state), std::move(geometry), {}, {}};
  b.bbox = geo::combined_bbox(b.geometry);
  return b;
}

std::vector<CountyBoundary> load_boundaries(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_geometry, fmt::format("boundaries: {}", e.what()));
  }
  if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features"))
    throw Error(Errc::invalid_geometry, "boundaries: expected a GeoJSON FeatureCollection");
  std::vector<CountyBoundary> out;
  for (const auto& feature : doc["features"]) {
    const auto& props = feature.contains("properties") ? feature["properties"] : nlohmann::json{};
    std::string fips = normalize_fips(property_string(props, "GEOID"));
    if (!feature.contains("geometry") || feature["geometry"].is_null())
      throw Error(Errc::invalid_geometry, fmt::format("county {} has no geometry", fips));
    out.push_back(make_boundary(std::move(fips), property_string(props, "NAME"),
                                property_string(props, "STUSPS"),
                                geo::polygons_from_geojson(feature["geometry"])));
  }
  return out;
}

std::vector<CountyBoundary> load_boundaries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, fmt::format("cannot open {}", path.string()));
  return load_boundaries(in);
}

std::size_t attach_population(std::istream& in, std::vector<CountyBoundary>& boundaries) {
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header) throw Error(Errc::schema_error, "population CSV is empty");
  auto col = [&](std::string_view name) {
    auto it = std::find(header->begin(), header->end(), name);
    if (it == header->end())
      throw Error(Errc::schema_error, fmt::format("population CSV lacks column '{}'", name));
    return static_cast<std::size_t>(it - header->begin());
  };
  const std::size_t fips_col = col("fips"), year_col = col("year"), pop_col = col("population");

  std::map<std::string, CountyBoundary*> by_fips;
  for (auto& b : boundaries) by_fips.emplace(b.fips, &b);

  std::size_t unmatched = 0;
  while (auto row = reader.next()) {
    if (row->size() == 1 && (*row)[0].empty()) continue;
    const std::size_t need = std::max({fips_col, year_col, pop_col});
    if (row->size() <= need)
      throw Error(Errc::row_error, fmt::format("population CSV line {}: too few fields",
                                               reader.line()));
    int year = 0;
    double pop = 0.0;
    const auto& ys = (*row)[year_col];
    const auto& ps = (*row)[pop_col];
    if (std::from_chars(ys.data(), ys.data() + ys.size(), year).ec != std::errc{} ||
        std::from_chars(ps.data(), ps.data() + ps.size(), pop).ec != std::errc{})
      throw Error(Errc::row_error,
                  fmt::format("population CSV line {}: bad year or population", reader.line()));
    auto it = by_fips.find(normalize_fips((*row)[fips_col]));
    if (it == by_fips.end()) {
      ++unmatched;
      continue;
    }
    it->second->population_by_year[year] = pop;
  }
  return unmatched;
}

std::optional<AveragePopulation> average_population(const CountyBoundary& county,
                                                    std::span<const int> years) {
  AveragePopulation out;
  double sum = 0.0;
  std::size_t present = 0;
  for (int y : years) {
    auto it = county.population_by_year.find(y);
    if (it == county.population_by_year.end()) {
      out.missing_years.push_back(y);
    } else {
      sum += it->second;
      ++present;
    }
  }
  if (present == 0) return std::nullopt;
  out.value = sum / static_cast<double>(present);
  return out;
}

std::optional<std::string> assign_county(const geo::GeoPoint& p,
                                         std::span<const CountyBoundary> boundaries,
                                         const std::optional<std::string>& hint) {
  for (const auto& b : boundaries) {
    if (!b.bbox.contains(p)) continue;
    if (geo::point_in_region(p, b.geometry)) return b.fips;
  }
  if (hint && !hint->empty()) {
    const std::string wanted = normalize_name(*hint);
    for (const auto& b : boundaries)
      if (normalize_name(b.name) == wanted) return b.fips;
  }
  return std::nullopt;
}

std::vector<std::optional<std::string>> county_keys(std::span<const ingest::EventRecord> events,
                                                    std::span<const CountyBoundary> boundaries,
                                                    unsigned threads) {
  std::vector<std::optional<std::string>> keys(events.size());
  parallel_for(events.size(), threads, [&](std::size_t i) {
    keys[i] = assign_county(events[i].point, boundaries, events[i].county_hint);
  });
  return keys;
}

std::string location_key(const geo::GeoPoint& p, int decimals) {
  const auto r = ingest::round_point(p, decimals);
  return fmt::format("{:.{}f},{:.{}f}", r.lat(), decimals, r.lon(), decimals);
}

std::vector<std::optional<std::string>> location_keys(std::span<const ingest::EventRecord> events,
                                                      int decimals) {
  std::vector<std::optional<std::string>> keys;
  keys.reserve(events.size());
  for (const auto& e : events) keys.emplace_back(location_key(e.point, decimals));
  return keys;
}

KeyedCounts count_by_key(std::span<const std::optional<std::string>> keys) {
  KeyedCounts out;
  for (const auto& k : keys) {
    if (k)
      ++out.counts[*k];
    else
      ++out.unassigned;
  }
  return out;
}

DistributionStats distribution_stats(std::span<const double> values,
                                     const MomentConventions& conv) {
  if (values.empty()) throw Error(Errc::insufficient_data, "distribution_stats of no values");
  DistributionStats s;
  s.n = values.size();
  const double n = static_cast<double>(s.n);
  double sum = 0.0;
  s.max = values.front();
  for (double v : values) {
    sum += v;
    s.max = std::max(s.max, v);
  }
  s.mean = sum / n;

  // Sums of powered deviations; ratios are formed from the sums directly so
  // exact inputs stay exact (e.g. {1,2,3} gives kurtosis 1.5 with no rounding).
  double s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (double v : values) {
    const double d = v - s.mean;
    const double d2 = d * d;
    s2 += d2;
    s3 += d2 * d;
    s4 += d2 * d2;
  }
  if (s.n >= 2) s.sd = std::sqrt(s2 / (conv.sample_sd ? n - 1.0 : n));
  if (s.n >= 3 && s2 > 0.0) {
    s.skewness = std::sqrt(n) * s3 / std::pow(s2, 1.5);
    const double b2 = n * s4 / (s2 * s2);
    s.kurtosis = conv.excess_kurtosis ? b2 - 3.0 : b2;
  }
  return s;
}

std::vector<double> count_values(const KeyedCounts& counts) {
  std::vector<double> out;
  out.reserve(counts.counts.size());
  for (const auto& [key, c] : counts.counts) out.push_back(static_cast<double>(c));
  return out;
}

std::map<std::string, double> z_scores(const std::map<std::string, std::size_t>& counts,
                                       double mean, double sd) {
  if (!(sd > 0.0)) throw Error(Errc::domain_error, fmt::format("z-scores need sd > 0, got {}", sd));
  std::map<std::string, double> out;
  for (const auto& [key, c] : counts) out.emplace(key, (static_cast<double>(c) - mean) / sd);
  return out;
}

double share_with_at_least(const std::map<std::string, std::size_t>& counts,
                           std::size_t total_units, std::size_t threshold) {
  if (total_units == 0) throw Error(Errc::domain_error, "share_with_at_least: total_units is 0");
  if (total_units < counts.size())
    throw Error(Errc::domain_error,
                fmt::format("share_with_at_least: {} keys exceed total_units {}", counts.size(),
                            total_units));
  const auto hits = std::count_if(counts.begin(), counts.end(),
                                  [&](const auto& kv) { return kv.second >= threshold; });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(total_units);
}

double per_capita_ratio(double count, double avg_population) {
  if (!(avg_population > 0.0))
    throw Error(Errc::domain_error,
                fmt::format("per_capita_ratio: population must be positive, got {}",
                            avg_population));
  return 1000.0 * count / avg_population;
}

std::vector<RankedEntry> rank_by(const std::map<std::string, double>& values, bool descending) {
  std::vector<RankedEntry> out;
  out.reserve(values.size());
  for (const auto& [key, v] : values) out.push_back({key, v, 0});
  // std::map iteration is already key-ordered, so a stable sort on value
  // leaves ties in ascending key order.
  std::stable_sort(out.begin(), out.end(), [&](const RankedEntry& a, const RankedEntry& b) {
    return descending ? a.value > b.value : a.value < b.value;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

}  // namespace pvstat::county
