#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pvstat/geo.hpp"

namespace pvstat::spatial {

struct NNSummary {
  std::vector<double> distances;  // one per input point, same order
  double mean = 0.0;
  double sample_variance = 0.0;   // n-1 denominator
};

/// Clark-Evans expectations for complete spatial randomness at density
/// n / area. `ratio` (observed / expected mean) is filled by with_observed().
struct CSRBaseline {
  double density = 0.0;
  double expected_mean = 0.0;
  double expected_variance = 0.0;
  std::optional<double> ratio;

  CSRBaseline with_observed(double observed_mean) const;
};

/// Geodesic distance from each point to its nearest other point, by
/// exhaustive scan. Throws Error(insufficient_data) for fewer than 2 points.
NNSummary nn_distances(std::span<const geo::GeoPoint> points,
                       geo::LengthUnit unit = geo::LengthUnit::km, unsigned threads = 1);

/// Area is in squared units of whatever length the caller measures NN
/// distances in. Throws Error(domain_error) unless n >= 1 and area > 0.
CSRBaseline clark_evans(std::size_t n, double area);

struct TrialStats {
  double mean = 0.0;
  double sample_variance = 0.0;
};

struct MonteCarloResult {
  std::vector<TrialStats> trials;  // in trial order
  CSRBaseline baseline;            // clark_evans(n, area)
};

/// Repeats {sample n area-uniform points, summarise NN distances} `trials`
/// times. Trial i draws from derive_seed(seed, i), so the result does not
/// depend on `threads`.
MonteCarloResult monte_carlo_csr(std::span<const geo::RegionPolygon> region, double area,
                                 std::size_t n, std::size_t trials, std::uint64_t seed,
                                 geo::LengthUnit unit = geo::LengthUnit::km,
                                 unsigned threads = 1);
MonteCarloResult monte_carlo_csr(const geo::RegionPolygon& region, double area, std::size_t n,
                                 std::size_t trials, std::uint64_t seed,
                                 geo::LengthUnit unit = geo::LengthUnit::km,
                                 unsigned threads = 1);

}  // namespace pvstat::spatial
