#include "pvstat/clustering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "pvstat/error.hpp"
#include "pvstat/parallel.hpp"
#include "pvstat/random.hpp"

namespace pvstat::cluster {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

using Vec3 = std::array<double, 3>;

Vec3 to_unit_vector(const geo::GeoPoint& p) {
  const double lat = p.lat() * kDegToRad, lon = p.lon() * kDegToRad;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

struct Assignment {
  std::vector<std::size_t> cluster;
  std::vector<double> distance;
};

void assign_nearest(std::span<const geo::GeoPoint> points,
                    const std::vector<geo::GeoPoint>& centroids, const KMeansOptions& opt,
                    Assignment& a) {
  parallel_for(points.size(), opt.threads, [&](std::size_t i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = geo::geo_distance(points[i], centroids[c], opt.unit);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    a.cluster[i] = best;
    a.distance[i] = best_d;
  });
}

// Moves the farthest point of a multi-member cluster into each empty
// cluster. Returns false if nothing was empty.
bool reseed_empty(std::span<const geo::GeoPoint> points, std::vector<geo::GeoPoint>& centroids,
                  Assignment& a) {
  const std::size_t k = centroids.size();
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t c : a.cluster) ++sizes[c];
  bool any = false;
  for (std::size_t empty = 0; empty < k; ++empty) {
    if (sizes[empty] != 0) continue;
    std::size_t far = points.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (sizes[a.cluster[i]] < 2) continue;
      if (a.distance[i] > far_d) {
        far_d = a.distance[i];
        far = i;
      }
    }
    // k <= distinct points guarantees a donor exists.
    if (far == points.size())
      throw Error(Errc::infeasible, "k-means: no point available to reseed an empty cluster");
    --sizes[a.cluster[far]];
    ++sizes[empty];
    a.cluster[far] = empty;
    a.distance[far] = 0.0;
    centroids[empty] = points[far];
    any = true;
  }
  return any;
}

double objective_of(const Assignment& a) {
  double sum = 0.0;
  for (double d : a.distance) sum += d * d;
  return sum;
}

std::vector<geo::GeoPoint> kmeanspp_init(std::span<const geo::GeoPoint> points, std::size_t k,
                                         Engine& rng, geo::LengthUnit unit) {
  const std::size_t n = points.size();
  std::vector<geo::GeoPoint> centroids;
  centroids.reserve(k);
  centroids.push_back(points[uniform_index(rng, n)]);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = geo::geo_distance(points[i], centroids.back(), unit);
      d2[i] = std::min(d2[i], d * d);
      total += d2[i];
    }
    const double target = uniform01(rng) * total;
    double acc = 0.0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      acc += d2[i];
      pick = i;
      if (acc > target) break;
    }
    if (pick == n) throw Error(Errc::infeasible, "k-means++: all points coincide with centroids");
    centroids.push_back(points[pick]);
  }
  return centroids;
}

ClusterResult run_from(std::span<const geo::GeoPoint> points, std::vector<geo::GeoPoint> init,
                       const KMeansOptions& opt) {
  const std::size_t k = init.size();
  ClusterResult r;
  r.k = k;
  r.centroids = std::move(init);

  const std::size_t n = points.size();
  Assignment a{std::vector<std::size_t>(n), std::vector<double>(n)};
  std::vector<std::vector<std::size_t>> members(k);
  std::vector<geo::GeoPoint> buffer;

  for (std::size_t iter = 1;; ++iter) {
    do {
      assign_nearest(points, r.centroids, opt, a);
    } while (reseed_empty(points, r.centroids, a));

    const double obj = objective_of(a);
    r.iterations = iter;
    if (!r.objective_trace.empty()) {
      const double prev = r.objective_trace.back();
      r.converged = prev <= 0.0 || (prev - obj) / prev < opt.tol;
    }
    r.objective_trace.push_back(obj);
    if (r.converged || iter >= opt.max_iter) break;

    for (auto& m : members) m.clear();
    for (std::size_t i = 0; i < n; ++i) members[a.cluster[i]].push_back(i);
    for (std::size_t c = 0; c < k; ++c) {
      buffer.clear();
      for (std::size_t i : members[c]) buffer.push_back(points[i]);
      const geo::GeoPoint candidate = chordal_mean(buffer);
      double old_cost = 0.0, new_cost = 0.0;
      for (const auto& p : buffer) {
        const double d_old = geo::geo_distance(p, r.centroids[c], opt.unit);
        const double d_new = geo::geo_distance(p, candidate, opt.unit);
        old_cost += d_old * d_old;
        new_cost += d_new * d_new;
      }
      if (new_cost <= old_cost) r.centroids[c] = candidate;
    }
  }
  r.assignments = std::move(a.cluster);
  r.objective = r.objective_trace.back();
  return r;
}

void check_feasible(std::span<const geo::GeoPoint> points, std::size_t k) {
  if (k == 0) throw Error(Errc::parameter_error, "k-means: k must be >= 1");
  if (points.empty()) throw Error(Errc::parameter_error, "k-means: no points");
  std::set<std::pair<double, double>> distinct;
  for (const auto& p : points) distinct.emplace(p.lat(), p.lon());
  if (k > distinct.size())
    throw Error(Errc::infeasible, fmt::format("k-means: k={} exceeds {} distinct points", k,
                                              distinct.size()));
}

}  // namespace

geo::GeoPoint chordal_mean(std::span<const geo::GeoPoint> points) {
  if (points.empty()) throw Error(Errc::insufficient_data, "chordal_mean of no points");
  if (std::all_of(points.begin(), points.end(),
                  [&](const geo::GeoPoint& p) { return p == points.front(); }))
    return points.front();
  Vec3 sum{0.0, 0.0, 0.0};
  for (const auto& p : points) {
    const Vec3 v = to_unit_vector(p);
    for (int i = 0; i < 3; ++i) sum[i] += v[i];
  }
  const double norm = std::sqrt(sum[0] * sum[0] + sum[1] * sum[1] + sum[2] * sum[2]);
  if (norm < 1e-12 * static_cast<double>(points.size())) return points.front();
  const double lat = std::atan2(sum[2], std::hypot(sum[0], sum[1])) / kDegToRad;
  const double lon = std::atan2(sum[1], sum[0]) / kDegToRad;
  return geo::GeoPoint(std::clamp(lat, -90.0, 90.0), lon);
}

ClusterResult kmeans_geo(std::span<const geo::GeoPoint> points, std::size_t k,
                         std::uint64_t seed, const KMeansOptions& options) {
  if (options.restarts == 0) throw Error(Errc::parameter_error, "k-means: restarts must be >= 1");
  check_feasible(points, k);

  ClusterResult best;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    Engine rng(derive_seed(seed, r));
    ClusterResult run = run_from(points, kmeanspp_init(points, k, rng, options.unit), options);
    if (r == 0 || run.objective < best.objective) best = std::move(run);
  }
  return best;
}

ClusterResult kmeans_geo(std::span<const geo::GeoPoint> points,
                         std::vector<geo::GeoPoint> initial_centroids,
                         const KMeansOptions& options) {
  check_feasible(points, initial_centroids.size());
  return run_from(points, std::move(initial_centroids), options);
}

std::vector<ClusterSummary> cluster_summary(const ClusterResult& result,
                                            std::span<const geo::GeoPoint> points,
                                            geo::LengthUnit unit) {
  if (result.assignments.size() != points.size() || result.centroids.size() != result.k)
    throw Error(Errc::consistency_error,
                fmt::format("cluster result covers {} points / {} centroids, expected {} / {}",
                            result.assignments.size(), result.centroids.size(), points.size(),
                            result.k));
  std::vector<ClusterSummary> out(result.k);
  for (std::size_t c = 0; c < result.k; ++c) out[c].centroid = result.centroids[c];
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t c = result.assignments[i];
    if (c >= result.k)
      throw Error(Errc::consistency_error, fmt::format("point {} has cluster {} >= k", i, c));
    ++out[c].size;
    out[c].mean_distance += geo::geo_distance(points[i], result.centroids[c], unit);
  }
  for (auto& s : out)
    if (s.size) s.mean_distance /= static_cast<double>(s.size);
  return out;
}

}  // namespace pvstat::cluster
