#include "pvstat/stknn.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pvstat/error.hpp"
#include "pvstat/parallel.hpp"

namespace pvstat::stknn {

namespace {

void check_params(const DistanceParams& params) {
  if (!(params.lambda >= 0.0) || !std::isfinite(params.lambda))
    throw Error(Errc::parameter_error,
                fmt::format("distance weight must be finite and >= 0, got {}", params.lambda));
}

void check_k(std::size_t k, std::size_t n_train) {
  if (k == 0 || k % 2 == 0)
    throw Error(Errc::parameter_error, fmt::format("k must be a positive odd number, got {}", k));
  if (k > n_train)
    throw Error(Errc::infeasible,
                fmt::format("k={} exceeds training set size {}", k, n_train));
}

// Indices of the `count` nearest training events, nearest first, ties by index.
std::vector<std::size_t> nearest(std::span<const SpaceTimeEvent> train,
                                 const SpaceTimeEvent& query, std::size_t count,
                                 const DistanceParams& params) {
  std::vector<std::pair<double, std::size_t>> d(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) d[i] = {st_distance(query, train[i], params), i};
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(count), d.end());
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = d[i].second;
  return out;
}

}  // namespace

SpaceTimeEvent to_space_time(const ingest::EventRecord& record) {
  return {ingest::to_epoch_day(record.date), record.point, record.fatalities > 0 ? 1 : 0};
}

double st_distance(const SpaceTimeEvent& a, const SpaceTimeEvent& b,
                   const DistanceParams& params) {
  const double days = static_cast<double>(a.epoch_day > b.epoch_day ? a.epoch_day - b.epoch_day
                                                                    : b.epoch_day - a.epoch_day);
  return days + params.lambda * geo::geo_distance(a.point, b.point, params.unit);
}

int knn_classify(std::span<const SpaceTimeEvent> train, const SpaceTimeEvent& query,
                 std::size_t k, const DistanceParams& params) {
  check_params(params);
  check_k(k, train.size());
  std::size_t ones = 0;
  for (std::size_t i : nearest(train, query, k, params)) ones += train[i].label == 1;
  return 2 * ones > k ? 1 : 0;
}

AccuracyCurve evaluate(std::span<const SpaceTimeEvent> train,
                       std::span<const SpaceTimeEvent> test, std::span<const std::size_t> ks,
                       const DistanceParams& params, unsigned threads) {
  check_params(params);
  if (train.empty() || test.empty())
    throw Error(Errc::insufficient_data, "evaluate needs non-empty train and test sets");
  if (ks.empty()) throw Error(Errc::parameter_error, "evaluate needs at least one k");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    check_k(ks[i], train.size());
    if (i && ks[i] <= ks[i - 1])
      throw Error(Errc::parameter_error, "k values must be strictly increasing");
  }
  const std::size_t kmax = ks.back();

  // predictions[t * ks.size() + j] = predicted label of test t at ks[j]
  std::vector<int> predictions(test.size() * ks.size());
  parallel_for(test.size(), threads, [&](std::size_t t) {
    const auto idx = nearest(train, test[t], kmax, params);
    std::size_t ones = 0, taken = 0;
    for (std::size_t j = 0; j < ks.size(); ++j) {
      for (; taken < ks[j]; ++taken) ones += train[idx[taken]].label == 1;
      predictions[t * ks.size() + j] = 2 * ones > ks[j] ? 1 : 0;
    }
  });

  AccuracyCurve curve;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    CurvePoint pt{ks[j], 0.0, test.size(), {}};
    for (std::size_t t = 0; t < test.size(); ++t) {
      const int pred = predictions[t * ks.size() + j];
      const int truth = test[t].label;
      if (pred == 1 && truth == 1) ++pt.confusion.tp;
      else if (pred == 0 && truth == 0) ++pt.confusion.tn;
      else if (pred == 1) ++pt.confusion.fp;
      else ++pt.confusion.fn;
    }
    pt.accuracy = 100.0 * static_cast<double>(pt.confusion.tp + pt.confusion.tn) /
                  static_cast<double>(test.size());
    curve.push_back(pt);
  }
  return curve;
}

std::vector<std::size_t> odd_ks(std::size_t kmax) {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k <= kmax; k += 2) out.push_back(k);
  return out;
}

std::pair<std::vector<SpaceTimeEvent>, std::vector<SpaceTimeEvent>> split_by_year(
    std::span<const ingest::EventRecord> events, const std::set<int>& train_years,
    const std::set<int>& test_years) {
  std::pair<std::vector<SpaceTimeEvent>, std::vector<SpaceTimeEvent>> out;
  for (const auto& e : events) {
    const int y = static_cast<int>(e.date.year());
    if (train_years.count(y)) out.first.push_back(to_space_time(e));
    if (test_years.count(y)) out.second.push_back(to_space_time(e));
  }
  return out;
}

}  // namespace pvstat::stknn
