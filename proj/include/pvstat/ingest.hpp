#pragma once

#include <chrono>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pvstat/geo.hpp"

namespace pvstat::ingest {

using Date = std::chrono::year_month_day;

/// One dated, located incident.
struct EventRecord {
  Date date;
  geo::GeoPoint point;
  std::string event_type;
  std::string sub_event_type;
  std::int64_t fatalities = 0;
  std::string notes;
  std::string source;
  std::optional<std::string> county_hint;  // ACLED admin2
  std::optional<std::string> state;        // ACLED admin1

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// Logical field -> CSV header name. Defaults are the ACLED export headers.
/// Optional fields may be set to an empty string to mean "not present".
struct ColumnMap {
  std::string date = "event_date";
  std::string latitude = "latitude";
  std::string longitude = "longitude";
  std::string event_type = "event_type";
  std::string sub_event_type = "sub_event_type";
  std::string fatalities = "fatalities";
  std::string notes = "notes";
  std::string source = "source";
  std::string admin2 = "admin2";
  std::string admin1 = "admin1";
};

struct RowError {
  std::size_t row = 0;   // 1-based data row (header excluded)
  std::size_t line = 0;  // physical line the row starts on
  std::string field;     // logical field name, empty for whole-row problems
  std::string message;
};

struct ParseResult {
  std::vector<EventRecord> records;
  std::vector<RowError> errors;
};

/// Parses an ACLED-schema CSV stream. Missing mapped columns in the header
/// throw Error(schema_error). Malformed rows are collected (strict=false) or
/// throw Error(row_error) (strict=true). Row order is preserved.
ParseResult parse_events(std::istream& in, const ColumnMap& map = {}, bool strict = false);

/// Writes records back out with the mapped headers; parse_events reads the
/// result back to identical records.
void write_events(std::ostream& out, std::span<const EventRecord> events,
                  const ColumnMap& map = {});

/// Accepts ISO "YYYY-MM-DD" and ACLED's "D Month YYYY".
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& date);

/// Days since 1970-01-01.
std::int64_t to_epoch_day(const Date& date);

struct EventFilter {
  bool accept_all = false;
  std::set<std::string> event_types;
  std::set<std::string> sub_event_types;

  /// Default political-violence predicate. The upstream selection was never
  /// published, so this is an approximation.
  static EventFilter political_violence();
  static EventFilter all() { return EventFilter{true, {}, {}}; }
};

/// Stable subsequence whose event_type or sub_event_type is accepted.
/// Throws Error(config_error) when the filter accepts nothing.
std::vector<EventRecord> filter_events(std::span<const EventRecord> events,
                                       const EventFilter& filter);

inline constexpr int kDefaultLocationDecimals = 4;

double round_coordinate(double value, int decimals = kDefaultLocationDecimals);
geo::GeoPoint round_point(const geo::GeoPoint& p, int decimals = kDefaultLocationDecimals);

/// Distinct rounded coordinates in first-occurrence order.
std::vector<geo::GeoPoint> unique_locations(std::span<const EventRecord> events,
                                            int decimals = kDefaultLocationDecimals);
std::vector<geo::GeoPoint> unique_locations(std::span<const geo::GeoPoint> points,
                                            int decimals = kDefaultLocationDecimals);

}  // namespace pvstat::ingest
