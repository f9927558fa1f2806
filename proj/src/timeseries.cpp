#include "pvstat/timeseries.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pvstat/error.hpp"

namespace pvstat::timeseries {

namespace {

int month_index(const YearMonth& ym) { return ym.year * 12 + static_cast<int>(ym.month) - 1; }

YearMonth from_index(int idx) {
  // floor division keeps negative years sane
  const int year = idx >= 0 ? idx / 12 : -((-idx + 11) / 12);
  return {year, static_cast<unsigned>(idx - year * 12 + 1)};
}

}  // namespace

MonthlySeries monthly_counts(std::span<const ingest::EventRecord> events) {
  MonthlySeries out;
  if (events.empty()) return out;
  std::vector<int> idx;
  idx.reserve(events.size());
  for (const auto& e : events)
    idx.push_back(month_index({static_cast<int>(e.date.year()),
                               static_cast<unsigned>(e.date.month())}));
  const auto [lo, hi] = std::minmax_element(idx.begin(), idx.end());
  const int first = *lo;
  out.resize(static_cast<std::size_t>(*hi - first + 1));
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i].month = from_index(first + static_cast<int>(i));
  for (int m : idx) ++out[static_cast<std::size_t>(m - first)].count;
  return out;
}

OutlierFlags flag_outliers(const MonthlySeries& series, double factor) {
  if (series.size() < 2)
    throw Error(Errc::insufficient_data,
                fmt::format("outlier flagging needs >= 2 months, got {}", series.size()));
  const double n = static_cast<double>(series.size());
  OutlierFlags out;
  double sum = 0.0;
  for (const auto& m : series) sum += static_cast<double>(m.count);
  out.mean = sum / n;
  double ss = 0.0;
  for (const auto& m : series) {
    const double d = static_cast<double>(m.count) - out.mean;
    ss += d * d;
  }
  out.sd = std::sqrt(ss / (n - 1.0));
  out.threshold = out.mean + factor * out.sd;
  for (const auto& m : series)
    if (static_cast<double>(m.count) > out.threshold) out.flagged.push_back(m.month);
  return out;
}

}  // namespace pvstat::timeseries
