#include "fixtures.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "pvstat/random.hpp"

namespace pvstat::testing {

namespace {

struct City {
  const char* fips;
  const char* county;
  const char* state_abbr;
  const char* state;
  double lat, lon;
  double population;
};

constexpr std::array<City, 4> kCities{{
    {"41051", "Multnomah", "OR", "Oregon", 45.52, -122.68, 812000},
    {"36061", "New York", "NY", "New York", 40.78, -73.97, 1630000},
    {"06037", "Los Angeles", "CA", "California", 34.05, -118.25, 9900000},
    {"27053", "Hennepin", "MN", "Minnesota", 44.98, -93.27, 1280000},
}};
constexpr double kHalfWidth = 0.3;

constexpr std::array<const char*, 16> kWords{
    "police", "protesters", "clashed", "downtown", "tear",   "gas",     "windows", "smashed",
    "rally",  "arrested",   "fire",    "federal",  "justice", "crowd",  "curfew",  "building"};

}  // namespace

TempDir::TempDir(const std::string& prefix) {
  static std::uint64_t counter = 0;
  Engine rng(reinterpret_cast<std::uintptr_t>(this) ^ ++counter ^
             static_cast<std::uint64_t>(std::hash<std::string>{}(prefix)));
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = std::filesystem::temp_directory_path() /
                     fmt::format("{}-{:016x}", prefix, rng());
    if (std::filesystem::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("could not create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_synthetic_events(const std::filesystem::path& path, std::size_t n, std::uint64_t seed) {
  Engine rng(seed);
  std::ofstream out(path);
  out << "event_date,latitude,longitude,event_type,sub_event_type,fatalities,notes,source,"
         "admin2,admin1\n";
  const int day0 = 18262;           // 2020-01-01
  const int span = 1827;            // through 2024-12-31
  const int surge0 = 18383;         // 2020-05-01
  for (std::size_t i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    double lat, lon;
    std::string admin2, admin1;
    if (u < 0.7) {
      const auto& c = kCities[uniform_index(rng, kCities.size())];
      lat = c.lat + uniform(rng, -0.15, 0.15);
      lon = c.lon + uniform(rng, -0.15, 0.15);
      admin2 = c.county;
      admin1 = c.state;
    } else {
      lat = uniform(rng, 26.0, 48.5);
      lon = uniform(rng, -123.5, -68.0);
    }
    // Snap to 4 decimals, and make some events share exact locations.
    if (uniform01(rng) < 0.3) {
      lat = std::round(lat * 100) / 100;
      lon = std::round(lon * 100) / 100;
    }
    const int day = uniform01(rng) < 0.15 ? surge0 + static_cast<int>(uniform_index(rng, 61))
                                          : day0 + static_cast<int>(uniform_index(rng, span));
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{day}}};

    const double t = uniform01(rng);
    const char* type = t < 0.5 ? "Riots" : t < 0.8 ? "Violence against civilians" : "Protests";
    const char* sub = t < 0.35   ? "Violent demonstration"
                      : t < 0.5  ? "Mob violence"
                      : t < 0.8  ? "Attack"
                                 : "Peaceful protest";
    const int fatalities = uniform01(rng) < 0.11 ? 1 + static_cast<int>(uniform_index(rng, 3)) : 0;

    std::string notes;
    const std::size_t words = 4 + uniform_index(rng, 8);
    for (std::size_t w = 0; w < words; ++w) {
      if (w) notes += uniform01(rng) < 0.1 ? ", " : " ";
      notes += kWords[uniform_index(rng, kWords.size())];
    }
    if (uniform01(rng) < 0.05) notes += " \"quoted\" 2020";

    std::string quoted_notes = "\"";
    for (char ch : notes) quoted_notes += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    quoted_notes += "\"";
    out << fmt::format("{:04d}-{:02d}-{:02d},{:.4f},{:.4f},{},{},{},{},Synthetic wire,{},{}\n",
                       static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                       static_cast<unsigned>(ymd.day()), lat, lon, type, sub, fatalities,
                       quoted_notes, admin2, admin1);
  }
}

void write_synthetic_boundaries(const std::filesystem::path& path) {
  std::ofstream out(path);
  out << "{\"type\":\"FeatureCollection\",\"features\":[\n";
  for (std::size_t i = 0; i < kCities.size(); ++i) {
    const auto& c = kCities[i];
    const double s = c.lat - kHalfWidth, n = c.lat + kHalfWidth;
    const double w = c.lon - kHalfWidth, e = c.lon + kHalfWidth;
    out << fmt::format(
        "{{\"type\":\"Feature\",\"properties\":{{\"GEOID\":\"{}\",\"NAME\":\"{}\",\"STUSPS\":"
        "\"{}\"}},\"geometry\":{{\"type\":\"Polygon\",\"coordinates\":[[[{},{}],[{},{}],[{},{}],"
        "[{},{}],[{},{}]]]}}}}{}\n",
        c.fips, c.county, c.state_abbr, w, s, e, s, e, n, w, n, w, s,
        i + 1 < kCities.size() ? "," : "");
  }
  out << "]}\n";
}

void write_synthetic_population(const std::filesystem::path& path) {
  std::ofstream out(path);
  out << "fips,year,population\n";
  for (const auto& c : kCities)
    for (int y = 2020; y <= 2023; ++y)
      out << fmt::format("{},{},{}\n", c.fips, y, c.population + 1000.0 * (y - 2020));
}

LabelledPoints gaussian_clusters(const std::vector<geo::GeoPoint>& centers,
                                 std::size_t per_cluster, double sigma_deg, std::uint64_t seed) {
  Engine rng(seed);
  LabelledPoints out;
  for (std::size_t c = 0; c < centers.size(); ++c)
    for (std::size_t i = 0; i < per_cluster; ++i) {
      const double r = sigma_deg * std::sqrt(-2.0 * std::log(1.0 - uniform01(rng)));
      const double t = 2 * std::numbers::pi * uniform01(rng);
      out.points.emplace_back(centers[c].lat() + r * std::cos(t), centers[c].lon() + r * std::sin(t));
      out.labels.push_back(c);
    }
  return out;
}

std::vector<geo::GeoPoint> heavy_tailed_clusters(std::size_t n, double half_width_deg,
                                                 double scale_deg, std::uint64_t seed) {
  const std::array<std::pair<double, double>, 3> centers{
      {{0.4 * half_width_deg, -0.5 * half_width_deg},
       {-0.3 * half_width_deg, 0.1 * half_width_deg},
       {0.2 * half_width_deg, 0.6 * half_width_deg}}};
  Engine rng(seed);
  std::vector<geo::GeoPoint> out;
  while (out.size() < n) {
    const auto& [clat, clon] = centers[out.size() % centers.size()];
    const double r = scale_deg * std::tan(0.5 * std::numbers::pi * uniform01(rng));
    const double t = 2 * std::numbers::pi * uniform01(rng);
    const double lat = clat + r * std::cos(t), lon = clon + r * std::sin(t);
    if (std::abs(lat) < half_width_deg && std::abs(lon) < half_width_deg) out.emplace_back(lat, lon);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pvstat::testing
