#pragma once

#include <compare>
#include <span>
#include <vector>

#include "pvstat/ingest.hpp"

namespace pvstat::timeseries {

struct YearMonth {
  int year = 0;
  unsigned month = 0;  // 1..12

  friend auto operator<=>(const YearMonth&, const YearMonth&) = default;
};

struct MonthCount {
  YearMonth month;
  std::size_t count = 0;
};

/// Contiguous months from the first to the last event month; quiet months
/// are present with count 0.
using MonthlySeries = std::vector<MonthCount>;

MonthlySeries monthly_counts(std::span<const ingest::EventRecord> events);

struct OutlierFlags {
  double mean = 0.0;
  double sd = 0.0;         // sample sd (n-1) over all months
  double threshold = 0.0;  // mean + factor * sd
  std::vector<YearMonth> flagged;
};

/// Months whose count is strictly above mean + factor * sd. Throws
/// Error(insufficient_data) for fewer than two months.
OutlierFlags flag_outliers(const MonthlySeries& series, double factor = 1.96);

}  // namespace pvstat::timeseries
