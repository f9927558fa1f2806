#include "pvstat/spatial_stats.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "pvstat/error.hpp"
#include "pvstat/parallel.hpp"
#include "pvstat/random.hpp"

namespace pvstat::spatial {

CSRBaseline CSRBaseline::with_observed(double observed_mean) const {
  CSRBaseline out = *this;
  out.ratio = observed_mean / expected_mean;
  return out;
}

NNSummary nn_distances(std::span<const geo::GeoPoint> points, geo::LengthUnit unit,
                       unsigned threads) {
  const std::size_t n = points.size();
  if (n < 2)
    throw Error(Errc::insufficient_data,
                fmt::format("nearest-neighbour distances need at least 2 points, got {}", n));

  NNSummary out;
  out.distances.assign(n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      best = std::min(best, geo::geo_distance(points[i], points[j], unit));
    }
    out.distances[i] = best;
  });

  double sum = 0.0;
  for (double d : out.distances) sum += d;
  out.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double d : out.distances) ss += (d - out.mean) * (d - out.mean);
  out.sample_variance = ss / static_cast<double>(n - 1);
  return out;
}

CSRBaseline clark_evans(std::size_t n, double area) {
  if (n < 1 || !(area > 0) || !std::isfinite(area))
    throw Error(Errc::domain_error,
                fmt::format("clark_evans needs n >= 1 and area > 0 (n={}, area={})", n, area));
  CSRBaseline b;
  b.density = static_cast<double>(n) / area;
  b.expected_mean = 1.0 / (2.0 * std::sqrt(b.density));
  b.expected_variance = (4.0 - std::numbers::pi) / (4.0 * std::numbers::pi * b.density);
  return b;
}

MonteCarloResult monte_carlo_csr(std::span<const geo::RegionPolygon> region, double area,
                                 std::size_t n, std::size_t trials, std::uint64_t seed,
                                 geo::LengthUnit unit, unsigned threads) {
  if (trials < 1) throw Error(Errc::parameter_error, "monte_carlo_csr needs trials >= 1");
  MonteCarloResult out;
  out.baseline = clark_evans(n, area);
  out.trials.resize(trials);
  // Parallelism is across trials; each trial's NN scan runs serially.
  parallel_for(trials, threads, [&](std::size_t t) {
    const auto pts = geo::sample_uniform(region, n, derive_seed(seed, t));
    const auto nn = nn_distances(pts, unit, 1);
    out.trials[t] = {nn.mean, nn.sample_variance};
  });
  return out;
}

MonteCarloResult monte_carlo_csr(const geo::RegionPolygon& region, double area, std::size_t n,
                                 std::size_t trials, std::uint64_t seed, geo::LengthUnit unit,
                                 unsigned threads) {
  return monte_carlo_csr(std::span<const geo::RegionPolygon>(&region, 1), area, n, trials, seed,
                         unit, threads);
}

}  // namespace pvstat::spatial
