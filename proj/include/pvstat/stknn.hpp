#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "pvstat/geo.hpp"
#include "pvstat/ingest.hpp"

namespace pvstat::stknn {

struct SpaceTimeEvent {
  std::int64_t epoch_day = 0;
  geo::GeoPoint point;
  int label = 0;  // 1 iff the event had at least one fatality
};

SpaceTimeEvent to_space_time(const ingest::EventRecord& record);

struct DistanceParams {
  geo::LengthUnit unit = geo::LengthUnit::km;
  double lambda = 1.0;  // weight of the geographic term, >= 0
};

/// |day difference| + lambda * geodesic distance.
double st_distance(const SpaceTimeEvent& a, const SpaceTimeEvent& b,
                   const DistanceParams& params = {});

/// Majority label of the k nearest training events. Distance ties go to the
/// lower training index. Throws Error(parameter_error) for even or zero k
/// or negative lambda, Error(infeasible) when k > train.size().
int knn_classify(std::span<const SpaceTimeEvent> train, const SpaceTimeEvent& query,
                 std::size_t k, const DistanceParams& params = {});

struct Confusion {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
};

struct CurvePoint {
  std::size_t k = 0;
  double accuracy = 0.0;  // percent
  std::size_t n_test = 0;
  Confusion confusion;
};

using AccuracyCurve = std::vector<CurvePoint>;

/// Accuracy of knn_classify on every test event for each k. ks must be odd
/// and strictly increasing. Test events are scored independently across
/// threads and merged in index order.
AccuracyCurve evaluate(std::span<const SpaceTimeEvent> train,
                       std::span<const SpaceTimeEvent> test, std::span<const std::size_t> ks,
                       const DistanceParams& params = {}, unsigned threads = 1);

/// 1, 3, ..., up to and including kmax when odd.
std::vector<std::size_t> odd_ks(std::size_t kmax);

/// Splits events into (train, test) by calendar year; events in neither set
/// are dropped.
std::pair<std::vector<SpaceTimeEvent>, std::vector<SpaceTimeEvent>> split_by_year(
    std::span<const ingest::EventRecord> events, const std::set<int>& train_years,
    const std::set<int>& test_years);

}  // namespace pvstat::stknn
