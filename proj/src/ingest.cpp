#include "pvstat/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "pvstat/csv.hpp"
#include "pvstat/error.hpp"

namespace pvstat::ingest {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

template <class T>
std::optional<T> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<unsigned> month_from_name(std::string_view name) {
  static constexpr std::array<std::string_view, 12> kNames = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (unsigned i = 0; i < kNames.size(); ++i) {
    if (lower == kNames[i] || (lower.size() == 3 && kNames[i].substr(0, 3) == lower))
      return i + 1;
  }
  return std::nullopt;
}

struct ColumnIndex {
  std::size_t date, latitude, longitude, fatalities;
  std::optional<std::size_t> event_type, sub_event_type, notes, source, admin2, admin1;
};

ColumnIndex resolve_columns(const std::vector<std::string>& header, const ColumnMap& map) {
  auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    if (name.empty()) return std::nullopt;
    auto it = std::find_if(header.begin(), header.end(),
                           [&](const std::string& h) { return trim(h) == name; });
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::string> missing;
  auto mandatory = [&](const char* field, const std::string& name) -> std::size_t {
    if (name.empty())
      throw Error(Errc::config_error, fmt::format("column map: '{}' is mandatory", field));
    auto idx = find(name);
    if (!idx) {
      missing.push_back(name);
      return 0;
    }
    return *idx;
  };
  auto optional_col = [&](const std::string& name) -> std::optional<std::size_t> {
    if (name.empty()) return std::nullopt;
    auto idx = find(name);
    if (!idx) missing.push_back(name);
    return idx;
  };

  ColumnIndex ci{};
  ci.date = mandatory("date", map.date);
  ci.latitude = mandatory("latitude", map.latitude);
  ci.longitude = mandatory("longitude", map.longitude);
  ci.fatalities = mandatory("fatalities", map.fatalities);
  ci.event_type = optional_col(map.event_type);
  ci.sub_event_type = optional_col(map.sub_event_type);
  ci.notes = optional_col(map.notes);
  ci.source = optional_col(map.source);
  ci.admin2 = optional_col(map.admin2);
  ci.admin1 = optional_col(map.admin1);
  if (!missing.empty())
    throw Error(Errc::schema_error,
                fmt::format("CSV header lacks mapped column(s): {}", fmt::join(missing, ", ")));
  return ci;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  using namespace std::chrono;
  text = trim(text);
  int y = 0;
  unsigned m = 0, d = 0;
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    auto yy = parse_number<int>(text.substr(0, 4));
    auto mm = parse_number<unsigned>(text.substr(5, 2));
    auto dd = parse_number<unsigned>(text.substr(8, 2));
    if (!yy || !mm || !dd) return std::nullopt;
    y = *yy, m = *mm, d = *dd;
  } else {
    const auto sp1 = text.find(' ');
    const auto sp2 = text.rfind(' ');
    if (sp1 == std::string_view::npos || sp1 == sp2) return std::nullopt;
    auto dd = parse_number<unsigned>(text.substr(0, sp1));
    auto mm = month_from_name(trim(text.substr(sp1 + 1, sp2 - sp1 - 1)));
    auto yy = parse_number<int>(text.substr(sp2 + 1));
    if (!yy || !mm || !dd) return std::nullopt;
    y = *yy, m = *mm, d = *dd;
  }
  const Date date{year{y}, month{m}, day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date& date) {
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(date.year()),
                     static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
}

std::int64_t to_epoch_day(const Date& date) {
  return std::chrono::sys_days{date}.time_since_epoch().count();
}

ParseResult parse_events(std::istream& in, const ColumnMap& map, bool strict) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw Error(Errc::schema_error, "CSV input is empty (no header row)");
  const ColumnIndex ci = resolve_columns(*header, map);

  ParseResult result;
  std::size_t row = 0;
  while (auto fields = reader.next()) {
    if (fields->size() == 1 && trim((*fields)[0]).empty()) continue;  // blank line
    ++row;
    const std::size_t line = reader.line();
    auto fail = [&](std::string field, std::string message) {
      RowError err{row, line, std::move(field), std::move(message)};
      if (strict)
        throw Error(Errc::row_error, fmt::format("row {} (line {}), field '{}': {}", err.row,
                                                 err.line, err.field, err.message));
      result.errors.push_back(std::move(err));
    };
    auto cell = [&](std::size_t idx) -> std::string_view {
      return idx < fields->size() ? std::string_view((*fields)[idx]) : std::string_view{};
    };
    auto opt_cell = [&](const std::optional<std::size_t>& idx) -> std::string {
      return idx ? std::string(cell(*idx)) : std::string{};
    };

    if (fields->size() < header->size()) {
      fail("", fmt::format("expected {} fields, found {}", header->size(), fields->size()));
      continue;
    }
    const auto date = parse_date(cell(ci.date));
    if (!date) {
      fail("date", fmt::format("unparseable date '{}'", cell(ci.date)));
      continue;
    }
    const auto lat = parse_number<double>(cell(ci.latitude));
    if (!lat || !std::isfinite(*lat) || *lat < -90 || *lat > 90) {
      fail("latitude", fmt::format("invalid latitude '{}'", cell(ci.latitude)));
      continue;
    }
    const auto lon = parse_number<double>(cell(ci.longitude));
    if (!lon || !std::isfinite(*lon) || *lon < -180 || *lon > 180) {
      fail("longitude", fmt::format("invalid longitude '{}'", cell(ci.longitude)));
      continue;
    }
    const auto fatalities = parse_number<std::int64_t>(cell(ci.fatalities));
    if (!fatalities || *fatalities < 0) {
      fail("fatalities", fmt::format("invalid fatality count '{}'", cell(ci.fatalities)));
      continue;
    }

    EventRecord rec{*date, geo::GeoPoint(*lat, *lon), opt_cell(ci.event_type),
                    opt_cell(ci.sub_event_type), *fatalities, opt_cell(ci.notes),
                    opt_cell(ci.source), std::nullopt, std::nullopt};
    if (ci.admin2 && !cell(*ci.admin2).empty()) rec.county_hint = std::string(cell(*ci.admin2));
    if (ci.admin1 && !cell(*ci.admin1).empty()) rec.state = std::string(cell(*ci.admin1));
    result.records.push_back(std::move(rec));
  }
  return result;
}

void write_events(std::ostream& out, std::span<const EventRecord> events, const ColumnMap& map) {
  struct Column {
    const std::string* header;
    std::string (*get)(const EventRecord&);
  };
  const std::array<Column, 10> columns{{
      {&map.date, [](const EventRecord& e) { return format_date(e.date); }},
      {&map.latitude, [](const EventRecord& e) { return fmt::format("{}", e.point.lat()); }},
      {&map.longitude, [](const EventRecord& e) { return fmt::format("{}", e.point.lon()); }},
      {&map.event_type, [](const EventRecord& e) { return e.event_type; }},
      {&map.sub_event_type, [](const EventRecord& e) { return e.sub_event_type; }},
      {&map.fatalities, [](const EventRecord& e) { return fmt::format("{}", e.fatalities); }},
      {&map.notes, [](const EventRecord& e) { return e.notes; }},
      {&map.source, [](const EventRecord& e) { return e.source; }},
      {&map.admin2, [](const EventRecord& e) { return e.county_hint.value_or(""); }},
      {&map.admin1, [](const EventRecord& e) { return e.state.value_or(""); }},
  }};
  std::vector<std::string> row;
  for (const auto& c : columns)
    if (!c.header->empty()) row.push_back(*c.header);
  csv::write_row(out, row);
  for (const auto& e : events) {
    row.clear();
    for (const auto& c : columns)
      if (!c.header->empty()) row.push_back(c.get(e));
    csv::write_row(out, row);
  }
}

EventFilter EventFilter::political_violence() {
  return EventFilter{false, {"Riots", "Violence against civilians"}, {"Violent demonstration"}};
}

std::vector<EventRecord> filter_events(std::span<const EventRecord> events,
                                       const EventFilter& filter) {
  if (filter.accept_all) return {events.begin(), events.end()};
  if (filter.event_types.empty() && filter.sub_event_types.empty())
    throw Error(Errc::config_error, "event filter has an empty accept-list");
  std::vector<EventRecord> out;
  for (const auto& e : events) {
    if (filter.event_types.count(e.event_type) || filter.sub_event_types.count(e.sub_event_type))
      out.push_back(e);
  }
  return out;
}

double round_coordinate(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // + 0.0 folds -0.0 into 0.0 so equal keys print identically.
  return std::round(value * scale) / scale + 0.0;
}

geo::GeoPoint round_point(const geo::GeoPoint& p, int decimals) {
  return geo::GeoPoint(round_coordinate(p.lat(), decimals), round_coordinate(p.lon(), decimals));
}

std::vector<geo::GeoPoint> unique_locations(std::span<const geo::GeoPoint> points, int decimals) {
  std::vector<geo::GeoPoint> out;
  std::set<std::pair<double, double>> seen;
  for (const auto& p : points) {
    const auto r = round_point(p, decimals);
    if (seen.emplace(r.lat(), r.lon()).second) out.push_back(r);
  }
  return out;
}

std::vector<geo::GeoPoint> unique_locations(std::span<const EventRecord> events, int decimals) {
  std::vector<geo::GeoPoint> points;
  points.reserve(events.size());
  for (const auto& e : events) points.push_back(e.point);
  return unique_locations(std::span<const geo::GeoPoint>(points), decimals);
}

}  // namespace pvstat::ingest
