#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pvstat/geo.hpp"

namespace pvstat::cluster {

struct KMeansOptions {
  std::size_t max_iter = 200;
  double tol = 1e-6;          // relative objective change that ends the run
  std::size_t restarts = 1;   // best objective wins, earliest restart on ties
  geo::LengthUnit unit = geo::LengthUnit::km;
  unsigned threads = 1;
};

struct ClusterResult {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // per point, in [0, k)
  std::vector<geo::GeoPoint> centroids;
  double objective = 0.0;                // sum of squared geodesic distances
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;   // objective after each assignment step
};

/// k-means on the sphere: k-means++ seeding, nearest-centroid assignment by
/// geodesic distance, chordal-mean centroid update. Deterministic for a
/// given seed regardless of options.threads.
///
/// An update is kept per cluster only if it does not raise that cluster's
/// geodesic cost, so the objective trace never increases. Empty clusters are
/// reseeded with the point farthest from its centroid.
///
/// Throws Error(parameter_error) for k == 0 or empty input and
/// Error(infeasible) when k exceeds the number of distinct points.
ClusterResult kmeans_geo(std::span<const geo::GeoPoint> points, std::size_t k,
                         std::uint64_t seed, const KMeansOptions& options = {});

/// Same iteration from caller-chosen starting centroids (k = their count);
/// options.restarts is ignored.
ClusterResult kmeans_geo(std::span<const geo::GeoPoint> points,
                         std::vector<geo::GeoPoint> initial_centroids,
                         const KMeansOptions& options = {});

/// Normalised mean of the points' unit vectors. Identical inputs return that
/// point exactly; a zero mean vector falls back to the first point.
geo::GeoPoint chordal_mean(std::span<const geo::GeoPoint> points);

struct ClusterSummary {
  std::size_t size = 0;
  geo::GeoPoint centroid;
  double mean_distance = 0.0;  // mean geodesic distance of members to centroid
};

/// Throws Error(consistency_error) if result and points disagree.
std::vector<ClusterSummary> cluster_summary(const ClusterResult& result,
                                            std::span<const geo::GeoPoint> points,
                                            geo::LengthUnit unit = geo::LengthUnit::km);

}  // namespace pvstat::cluster
