#include <chrono>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "pvstat/csv.hpp"
#include "pvstat/error.hpp"
#include "pvstat/ingest.hpp"

using namespace pvstat;
using namespace pvstat::ingest;
using namespace std::chrono;

namespace {

const std::string kHeader =
    "event_date,latitude,longitude,event_type,sub_event_type,fatalities,notes,source,admin2,"
    "admin1\n";

ParseResult parse(const std::string& text, bool strict = false, const ColumnMap& map = {}) {
  std::istringstream in(text);
  return parse_events(in, map, strict);
}

// Five rows, two of them violent demonstrations.
const std::string kFiveRows =
    kHeader +
    "2020-05-28,45.5134,-122.6809,Protests,Peaceful protest,0,march,Wire,Multnomah,Oregon\n"
    "2020-05-29,44.98,-93.27,Riots,Violent demonstration,1,fire,Wire,Hennepin,Minnesota\n"
    "2020-05-30,40.78,-73.97,Riots,Mob violence,0,clash,Wire,New York,New York\n"
    "2020-05-31,34.05,-118.25,Riots,Violent demonstration,0,looting,Wire,Los Angeles,California\n"
    "2020-06-01,38.9,-77.03,Violence against civilians,Attack,2,shooting,Wire,,\n";

}  // namespace

TEST(ParseEvents, HeaderOnly) {
  const auto r = parse(kHeader);
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(r.errors.empty());
}

TEST(ParseEvents, EmptyInputIsSchemaError) {
  try {
    parse("");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::schema_error);
  }
}

TEST(ParseEvents, SingleRow) {
  const auto r = parse(kHeader + "2020-05-28,45.5,-122.7,Riots,Violent demonstration,2,x,y,,\n");
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].fatalities, 2);
  EXPECT_EQ(r.records[0].date, year_month_day(year(2020), month(5), day(28)));
  EXPECT_EQ(r.records[0].point, geo::GeoPoint(45.5, -122.7));
  EXPECT_FALSE(r.records[0].county_hint.has_value());
}

TEST(ParseEvents, BadLatitudeCollected) {
  const auto r = parse(kHeader + "2020-05-28,abc,-122.7,Riots,Violent demonstration,0,,,,\n");
  EXPECT_TRUE(r.records.empty());
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].row, 1u);
  EXPECT_EQ(r.errors[0].line, 2u);
  EXPECT_EQ(r.errors[0].field, "latitude");
}

TEST(ParseEvents, ErrorsNameTheirRowAndKeepGoodRows) {
  const auto r = parse(kHeader +
                       "2020-05-28,45,-122,Riots,a,0,,,,\n"
                       "\n"
                       "2020-13-01,45,-122,Riots,a,0,,,,\n"
                       "2020-05-28,45,-122,Riots,a,-1,,,,\n"
                       "2020-05-28,45,200,Riots,a,0,,,,\n"
                       "2020-05-28,45\n"
                       "28 May 2020,45,-122,Riots,a,3,,,,\n");
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[1].fatalities, 3);
  ASSERT_EQ(r.errors.size(), 4u);
  EXPECT_EQ(r.errors[0].row, 2u);
  EXPECT_EQ(r.errors[0].line, 4u);
  EXPECT_EQ(r.errors[0].field, "date");
  EXPECT_EQ(r.errors[1].field, "fatalities");
  EXPECT_EQ(r.errors[2].field, "longitude");
  EXPECT_EQ(r.errors[3].field, "");
  EXPECT_EQ(r.errors[3].row, 5u);
}

TEST(ParseEvents, StrictThrowsRowError) {
  try {
    parse(kHeader + "2020-05-28,abc,-122.7,Riots,x,0,,,,\n", true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::row_error);
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
}

TEST(ParseEvents, MissingMappedColumn) {
  try {
    parse("event_date,latitude,longitude\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::schema_error);
  }
}

TEST(ParseEvents, CustomMapAndOptionalColumns) {
  ColumnMap map;
  map.date = "when";
  map.latitude = "y";
  map.longitude = "x";
  map.fatalities = "dead";
  map.event_type = map.sub_event_type = map.notes = map.source = map.admin1 = map.admin2 = "";
  const auto r = parse("dead,x,y,when\n1,-73.9,40.7,2021-01-06\n", false, map);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].point, geo::GeoPoint(40.7, -73.9));
  EXPECT_EQ(r.records[0].event_type, "");

  map.fatalities = "";
  EXPECT_THROW(parse("dead,x,y,when\n", false, map), Error);
}

TEST(ParseEvents, QuotedFieldsAndCrlf) {
  const auto r = parse(
      "\xEF\xBB\xBF" + kHeader.substr(0, kHeader.size() - 1) + "\r\n" +
      "2020-05-28,45,-122,Riots,a,0,\"police, \"\"quoted\"\"\nsecond line\",src,,\r\n");
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].notes, "police, \"quoted\"\nsecond line");
}

TEST(Csv, UnterminatedQuote) {
  std::istringstream in("a,\"b\n");
  csv::Reader reader(in);
  EXPECT_THROW(reader.next(), Error);
}

TEST(Csv, EscapeOnlyWhenNeeded) {
  EXPECT_EQ(csv::escape("plain"), "plain");
  EXPECT_EQ(csv::escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv::escape("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(ParseEvents, RoundTrip) {
  pvstat::testing::TempDir dir;
  pvstat::testing::write_synthetic_events(dir / "e.csv", 300, 5);
  std::ifstream in(dir / "e.csv");
  const auto first = parse_events(in);
  ASSERT_EQ(first.records.size(), 300u);
  ASSERT_TRUE(first.errors.empty());

  std::ostringstream out;
  write_events(out, first.records);
  const auto second = parse(out.str());
  EXPECT_TRUE(second.errors.empty());
  EXPECT_EQ(second.records, first.records);

  std::ostringstream again;
  write_events(again, second.records);
  EXPECT_EQ(again.str(), out.str());
}

TEST(FilterEvents, AcceptEventType) {
  const auto r = parse(kFiveRows);
  ASSERT_EQ(r.records.size(), 5u);
  const auto riots = filter_events(r.records, EventFilter{false, {"Riots"}, {}});
  ASSERT_EQ(riots.size(), 3u);
  for (const auto& e : riots) EXPECT_EQ(e.event_type, "Riots");
}

TEST(FilterEvents, AcceptAllIsIdentity) {
  const auto r = parse(kFiveRows);
  EXPECT_EQ(filter_events(r.records, EventFilter::all()), r.records);
}

TEST(FilterEvents, AcceptSubEventType) {
  const auto r = parse(kFiveRows);
  const auto vd = filter_events(r.records, EventFilter{false, {}, {"Violent demonstration"}});
  ASSERT_EQ(vd.size(), 2u);
  EXPECT_EQ(vd[0], r.records[1]);
  EXPECT_EQ(vd[1], r.records[3]);
}

TEST(FilterEvents, DefaultPredicateAndEmptyList) {
  const auto r = parse(kFiveRows);
  EXPECT_EQ(filter_events(r.records, EventFilter::political_violence()).size(), 4u);
  try {
    filter_events(r.records, EventFilter{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::config_error);
  }
}

TEST(UniqueLocations, IdenticalCoordinates) {
  std::vector<geo::GeoPoint> pts{{45.5, -122.7}, {45.5, -122.7}};
  EXPECT_EQ(unique_locations(std::span<const geo::GeoPoint>(pts)).size(), 1u);
}

TEST(UniqueLocations, SixthDecimalCollapses) {
  std::vector<geo::GeoPoint> pts{{45.513401, -122.680902}, {45.513404, -122.680899}};
  const auto u = unique_locations(std::span<const geo::GeoPoint>(pts));
  ASSERT_EQ(u.size(), 1u);
  EXPECT_EQ(u[0], geo::GeoPoint(45.5134, -122.6809));
}

TEST(UniqueLocations, EmptyAndOrder) {
  EXPECT_TRUE(unique_locations(std::span<const EventRecord>{}).empty());
  std::vector<geo::GeoPoint> pts{{3, 3}, {1, 1}, {3, 3}, {2, 2}};
  const auto u = unique_locations(std::span<const geo::GeoPoint>(pts));
  EXPECT_EQ(u, (std::vector<geo::GeoPoint>{{3, 3}, {1, 1}, {2, 2}}));
}

TEST(UniqueLocations, NegativeZeroFolds) {
  std::vector<geo::GeoPoint> pts{{-0.00001, 0.0}, {0.0, 0.00001}};
  EXPECT_EQ(unique_locations(std::span<const geo::GeoPoint>(pts)).size(), 1u);
}

TEST(UniqueLocations, Idempotent) {
  pvstat::testing::TempDir dir;
  pvstat::testing::write_synthetic_events(dir / "e.csv", 1000, 9);
  std::ifstream in(dir / "e.csv");
  const auto events = parse_events(in).records;
  const auto once = unique_locations(events);
  EXPECT_LT(once.size(), events.size());
  std::vector<EventRecord> standins;
  for (const auto& p : once) {
    EventRecord e = events.front();
    e.point = p;
    standins.push_back(e);
  }
  EXPECT_EQ(unique_locations(standins), once);
}

TEST(EpochDay, Examples) {
  EXPECT_EQ(to_epoch_day(year(1970) / 1 / 1), 0);
  EXPECT_EQ(to_epoch_day(year(1970) / 3 / 1), 59);
  EXPECT_EQ(to_epoch_day(year(2020) / 5 / 25) - to_epoch_day(year(2020) / 5 / 20), 5);
}

TEST(EpochDay, ConsecutiveDays1990To2100) {
  // Walk the calendar by hand-rolled month lengths rather than sys_days.
  auto leap = [](int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; };
  const unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  std::int64_t prev = to_epoch_day(year(1989) / 12 / 31);
  std::size_t leap_days = 0;
  for (int y = 1990; y <= 2100; ++y)
    for (unsigned m = 1; m <= 12; ++m) {
      const unsigned len = lengths[m - 1] + (m == 2 && leap(y));
      for (unsigned d = 1; d <= len; ++d) {
        const auto cur = to_epoch_day(year(y) / month(m) / day(d));
        ASSERT_EQ(cur - prev, 1) << y << "-" << m << "-" << d;
        prev = cur;
        leap_days += (m == 2 && d == 29);
      }
    }
  EXPECT_EQ(leap_days, 27u);  // 1992..2096, 2100 is not a leap year
}

TEST(ParseDate, Formats) {
  EXPECT_EQ(parse_date("2020-05-28"), year(2020) / 5 / 28);
  EXPECT_EQ(parse_date("28 May 2020"), year(2020) / 5 / 28);
  EXPECT_EQ(parse_date("1 january 2021"), year(2021) / 1 / 1);
  EXPECT_FALSE(parse_date("2021-02-29"));
  EXPECT_FALSE(parse_date("yesterday"));
  EXPECT_FALSE(parse_date(""));
  EXPECT_EQ(format_date(year(2020) / 5 / 8), "2020-05-08");
}
