#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pvstat/county_stats.hpp"
#include "pvstat/geo.hpp"
#include "pvstat/ingest.hpp"

namespace pvstat::cli {

enum class OutputFormat { csv, json };

struct SpatialParams {
  std::size_t trials = 30;
  std::optional<std::size_t> mc_points;  // defaults to the observed point count
  std::optional<std::filesystem::path> region;
  bool monte_carlo = true;
};

struct ClusterParams {
  std::vector<std::size_t> ks{2, 3, 4};
  std::string points = "locations";  // or "incidents"
  std::size_t max_iter = 200;
  double tol = 1e-6;
  std::size_t restarts = 1;
};

struct CountParams {
  std::size_t total_units = 3143;
  double z_threshold = 3.0;
  std::vector<std::size_t> share_thresholds{1, 2, 5};
};

struct RatioParams {
  std::vector<int> years{2020, 2021, 2022, 2023};
  std::size_t top = 10;
};

struct TimeseriesParams {
  double factor = 1.96;
};

struct KnnParams {
  std::set<int> train_years{2020, 2021, 2022};
  std::set<int> test_years{2023, 2024};
  std::size_t kmax = 31;
};

struct TermsParams {
  std::vector<std::string> where;
  std::optional<std::filesystem::path> stopwords;
  std::size_t top = 0;  // 0 keeps every term
};

struct RunConfig {
  std::string subcommand;
  std::filesystem::path input;
  ingest::ColumnMap columns;
  ingest::EventFilter filter = ingest::EventFilter::political_violence();
  bool strict = false;
  std::optional<std::filesystem::path> boundaries;
  std::optional<std::filesystem::path> population;
  std::optional<double> area;
  geo::LengthUnit area_unit = geo::LengthUnit::mi;  // area is in area_unit^2
  geo::LengthUnit unit = geo::LengthUnit::km;
  double lambda = 1.0;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = ".";
  OutputFormat format = OutputFormat::csv;
  std::string run_id;  // replaces the timestamp in report names when set
  unsigned threads = 0;
  int decimals = ingest::kDefaultLocationDecimals;
  county::MomentConventions moments;

  SpatialParams spatial;
  ClusterParams cluster;
  CountParams counts;
  RatioParams ratio;
  TimeseriesParams timeseries;
  KnnParams knn;
  TermsParams terms;
};

/// Parses argv-style arguments (without the program name) and runs one
/// subcommand. Returns 0 on success, 1 on data/config errors and 2 on usage
/// errors. Human-readable summaries go to `out`, diagnostics to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

/// Runs an already-parsed configuration. Throws pvstat::Error on failure.
/// Returns the report files written.
std::vector<std::filesystem::path> execute(RunConfig config, std::ostream& out,
                                           std::ostream& err);

}  // namespace pvstat::cli
