#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvstat/geo.hpp"
#include "pvstat/ingest.hpp"

namespace pvstat::county {

struct CountyBoundary {
  std::string fips;  // 5 digits
  std::string name;
  std::string state;
  std::vector<geo::RegionPolygon> geometry;
  std::map<int, double> population_by_year;
  geo::BoundingBox bbox{};
};

/// Validates the FIPS code and geometry and computes the bbox. Throws
/// Error(invalid_geometry) on a bad FIPS code or empty geometry.
CountyBoundary make_boundary(std::string fips, std::string name, std::string state,
                             std::vector<geo::RegionPolygon> geometry);

/// Census cartographic boundary layout: FeatureCollection whose features carry
/// GEOID, NAME and STUSPS properties.
std::vector<CountyBoundary> load_boundaries(std::istream& geojson);
std::vector<CountyBoundary> load_boundaries(const std::filesystem::path& path);

/// Reads a "fips,year,population" CSV into the matching boundaries.
/// Returns the number of rows whose fips matched no boundary.
std::size_t attach_population(std::istream& csv, std::vector<CountyBoundary>& boundaries);

struct AveragePopulation {
  double value = 0.0;
  std::vector<int> missing_years;  // requested years without an estimate
};

/// Arithmetic mean of the estimates present for `years`; nullopt if none are.
std::optional<AveragePopulation> average_population(const CountyBoundary& county,
                                                    std::span<const int> years);

/// FIPS of the first boundary containing p; otherwise the first boundary whose
/// name matches `hint` (case-insensitive, " County"/" Parish" suffix
/// ignored); otherwise nullopt.
std::optional<std::string> assign_county(const geo::GeoPoint& p,
                                         std::span<const CountyBoundary> boundaries,
                                         const std::optional<std::string>& hint = std::nullopt);

/// Per-event county keys (nullopt when unassignable), in event order.
std::vector<std::optional<std::string>> county_keys(std::span<const ingest::EventRecord> events,
                                                    std::span<const CountyBoundary> boundaries,
                                                    unsigned threads = 1);

/// "lat,lon" keys with both coordinates rounded to `decimals`.
std::string location_key(const geo::GeoPoint& p, int decimals = ingest::kDefaultLocationDecimals);
std::vector<std::optional<std::string>> location_keys(
    std::span<const ingest::EventRecord> events, int decimals = ingest::kDefaultLocationDecimals);

struct KeyedCounts {
  std::map<std::string, std::size_t> counts;
  std::size_t unassigned = 0;
};

KeyedCounts count_by_key(std::span<const std::optional<std::string>> keys);

struct MomentConventions {
  bool sample_sd = true;          // n-1 denominator; false for n
  bool excess_kurtosis = false;   // false reports raw m4/m2^2
};

struct DistributionStats {
  std::size_t n = 0;
  double mean = 0.0;
  double max = 0.0;
  std::optional<double> sd;        // needs n >= 2
  std::optional<double> skewness;  // g1 = m3 / m2^1.5, needs n >= 3 and m2 > 0
  std::optional<double> kurtosis;  // b2 = m4 / m2^2, same requirements
};

/// Throws Error(insufficient_data) for empty input; undefined moments are
/// left empty rather than reported as zero.
DistributionStats distribution_stats(std::span<const double> values,
                                     const MomentConventions& conv = {});

std::vector<double> count_values(const KeyedCounts& counts);

/// Throws Error(domain_error) unless sd > 0.
std::map<std::string, double> z_scores(const std::map<std::string, std::size_t>& counts,
                                       double mean, double sd);

/// Percentage of `total_units` whose count is >= threshold.
double share_with_at_least(const std::map<std::string, std::size_t>& counts,
                           std::size_t total_units, std::size_t threshold);

/// Incidents per 1000 residents.
double per_capita_ratio(double count, double avg_population);

struct RankedEntry {
  std::string key;
  double value = 0.0;
  std::size_t rank = 0;  // 1-based
};

/// Sorted by value; equal values fall back to ascending key, so ranks are
/// distinct and reproducible.
std::vector<RankedEntry> rank_by(const std::map<std::string, double>& values,
                                 bool descending = true);

}  // namespace pvstat::county
