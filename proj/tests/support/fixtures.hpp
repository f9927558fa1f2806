#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pvstat/geo.hpp"

namespace pvstat::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "pvstat");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Synthetic ACLED-style export: events concentrated around four US cities
// plus uniform scatter over the continental US, dated 2020-2024 with a surge
// in May-June 2020. About one event in nine has fatalities; roughly a fifth
// are peaceful protests that the default filter drops.
void write_synthetic_events(const std::filesystem::path& path, std::size_t n, std::uint64_t seed);

// Box-shaped "counties" around the four cities (Census GeoJSON layout).
void write_synthetic_boundaries(const std::filesystem::path& path);

// 2020-2023 population rows for the synthetic counties.
void write_synthetic_population(const std::filesystem::path& path);

struct LabelledPoints {
  std::vector<geo::GeoPoint> points;
  std::vector<std::size_t> labels;  // generating cluster per point
};

// Isotropic Gaussian blobs, `per_cluster` points each, sigma in degrees.
LabelledPoints gaussian_clusters(const std::vector<geo::GeoPoint>& centers,
                                 std::size_t per_cluster, double sigma_deg, std::uint64_t seed);

// Three city-like clusters inside the equatorial square of the given half
// width: dense cores with half-Cauchy radial spread (scale in degrees), so a
// few members sit far out. Points are clipped to the square.
std::vector<geo::GeoPoint> heavy_tailed_clusters(std::size_t n, double half_width_deg,
                                                 double scale_deg, std::uint64_t seed);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace pvstat::testing
