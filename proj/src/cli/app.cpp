#include <algorithm>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pvstat/cli.hpp"
#include "pvstat/error.hpp"
#include "pvstat/version.hpp"

namespace pvstat::cli {

namespace {

struct UnitNames {
  std::string area = "mi";
  std::string distance = "km";
};

void add_global_options(CLI::App& app, RunConfig& cfg, UnitNames& units, std::string& format,
                        std::string& sd_convention, std::string& kurtosis_convention,
                        std::vector<std::string>& event_types,
                        std::vector<std::string>& sub_event_types) {
  app.set_config("--config", "", "TOML/INI config file; command-line flags take precedence");

  app.add_option("-i,--input", cfg.input, "ACLED-schema CSV export");
  app.add_option("-o,--out", cfg.out_dir, "Report directory")->capture_default_str();
  app.add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_flag("--strict", cfg.strict, "Abort on the first malformed row");
  app.add_option("--run-id", cfg.run_id, "Use this instead of a UTC timestamp in report names");
  app.add_option("--threads", cfg.threads, "Worker threads (0 = hardware concurrency)")
      ->capture_default_str();

  auto& c = cfg.columns;
  app.add_option("--col-date", c.date, "Header of the event date column")->capture_default_str();
  app.add_option("--col-latitude", c.latitude)->capture_default_str();
  app.add_option("--col-longitude", c.longitude)->capture_default_str();
  app.add_option("--col-fatalities", c.fatalities)->capture_default_str();
  app.add_option("--col-event-type", c.event_type)->capture_default_str();
  app.add_option("--col-sub-event-type", c.sub_event_type)->capture_default_str();
  app.add_option("--col-notes", c.notes)->capture_default_str();
  app.add_option("--col-source", c.source)->capture_default_str();
  app.add_option("--col-admin2", c.admin2, "County column (used as an assignment hint)")
      ->capture_default_str();
  app.add_option("--col-admin1", c.admin1)->capture_default_str();

  app.add_option("--accept-event-type", event_types,
                 "Accepted event_type values (replaces the default filter)");
  app.add_option("--accept-sub-event-type", sub_event_types,
                 "Accepted sub_event_type values (replaces the default filter)");
  app.add_flag("--accept-all", cfg.filter.accept_all, "Disable event filtering");

  app.add_option("--boundaries", cfg.boundaries, "County boundaries GeoJSON FeatureCollection");
  app.add_option("--population", cfg.population, "Population CSV (fips,year,population)");
  app.add_option("--area", cfg.area, "Study-region area, in squared --area-unit");
  app.add_option("--area-unit", units.area, "Length unit the area is squared in")
      ->check(CLI::IsMember({"km", "mi"}))
      ->capture_default_str();
  app.add_option("--unit", units.distance, "Distance unit")
      ->check(CLI::IsMember({"km", "mi"}))
      ->capture_default_str();
  app.add_option("--lambda", cfg.lambda, "Weight of geographic distance in the space-time metric")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for randomized subcommands");
  app.add_option("--decimals", cfg.decimals, "Rounding of coordinates for location keys")
      ->check(CLI::Range(0, 10))
      ->capture_default_str();
  app.add_option("--sd", sd_convention, "Standard deviation denominator")
      ->check(CLI::IsMember({"sample", "population"}))
      ->capture_default_str();
  app.add_option("--kurtosis", kurtosis_convention, "Kurtosis convention")
      ->check(CLI::IsMember({"raw", "excess"}))
      ->capture_default_str();
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string format = "csv";
  std::string sd_convention = "sample";
  std::string kurtosis_convention = "raw";
  std::vector<std::string> event_types, sub_event_types;

  CLI::App app{"Spatial and temporal statistics for ACLED-style event data", "pvstat"};
  app.set_version_flag("--version", std::string(kVersion));
  app.fallthrough();
  app.require_subcommand(1);
  UnitNames units;
  add_global_options(app, cfg, units, format, sd_convention, kurtosis_convention, event_types,
                     sub_event_types);

  app.add_subcommand("ingest", "Validate and summarise the input");

  auto* spatial = app.add_subcommand("spatial", "Nearest-neighbour distances vs. spatial randomness");
  spatial->add_option("--trials", cfg.spatial.trials, "Monte Carlo trials")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  spatial->add_option("--mc-points", cfg.spatial.mc_points,
                      "Points per Monte Carlo trial (default: observed count)");
  spatial->add_option("--region", cfg.spatial.region,
                      "GeoJSON region for Monte Carlo sampling (default: square of --area)");
  bool no_mc = false;
  spatial->add_flag("--no-mc", no_mc, "Skip the Monte Carlo baseline");

  auto* cluster = app.add_subcommand("cluster", "Geodesic k-means");
  cluster->add_option("--k", cfg.cluster.ks, "Cluster counts")->capture_default_str();
  cluster->add_option("--points", cfg.cluster.points, "Cluster unique locations or incidents")
      ->check(CLI::IsMember({"locations", "incidents"}))
      ->capture_default_str();
  cluster->add_option("--max-iter", cfg.cluster.max_iter)->capture_default_str();
  cluster->add_option("--tol", cfg.cluster.tol)->capture_default_str();
  cluster->add_option("--restarts", cfg.cluster.restarts)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  for (const char* name : {"counties", "locations"}) {
    auto* sub = app.add_subcommand(name, std::string(name) == "counties"
                                             ? "Incident counts and z-scores per county"
                                             : "Incident counts and z-scores per location");
    sub->add_option("--total-units", cfg.counts.total_units,
                    "Denominator for share-of-units percentages")
        ->capture_default_str();
    sub->add_option("--z-threshold", cfg.counts.z_threshold)->capture_default_str();
    sub->add_option("--share-thresholds", cfg.counts.share_thresholds)->capture_default_str();
  }

  auto* ratio = app.add_subcommand("ratio", "Incidents per 1000 residents by county");
  ratio->add_option("--years", cfg.ratio.years, "Population years to average")
      ->capture_default_str();
  ratio->add_option("--top", cfg.ratio.top, "Counties by incident count to rank")
      ->capture_default_str();

  auto* ts = app.add_subcommand("timeseries", "Monthly counts with outlier flags");
  ts->add_option("--factor", cfg.timeseries.factor, "Standard deviations above the mean")
      ->capture_default_str();

  auto* knn = app.add_subcommand("knn", "Space-time k-NN fatality classification");
  std::vector<int> train_years(cfg.knn.train_years.begin(), cfg.knn.train_years.end());
  std::vector<int> test_years(cfg.knn.test_years.begin(), cfg.knn.test_years.end());
  knn->add_option("--train-years", train_years)->capture_default_str();
  knn->add_option("--test-years", test_years)->capture_default_str();
  knn->add_option("--kmax", cfg.knn.kmax, "Largest odd k evaluated")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* terms = app.add_subcommand("terms", "Term frequencies of event notes");
  terms->add_option("--where", cfg.terms.where,
                    "Restrict events: location=LAT,LON county=FIPS year=YYYY month=YYYY-MM "
                    "event_type=.. sub_event_type=.. admin1=.. admin2=..");
  terms->add_option("--stopwords", cfg.terms.stopwords, "Stopword file, one word per line");
  terms->add_option("--top", cfg.terms.top, "Keep only the N most frequent terms (0 = all)")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  cfg.subcommand = app.get_subcommands().front()->get_name();
  cfg.area_unit = geo::parse_length_unit(units.area);
  cfg.unit = geo::parse_length_unit(units.distance);
  cfg.format = format == "json" ? OutputFormat::json : OutputFormat::csv;
  cfg.moments.sample_sd = sd_convention == "sample";
  cfg.moments.excess_kurtosis = kurtosis_convention == "excess";
  cfg.spatial.monte_carlo = !no_mc;
  cfg.knn.train_years = {train_years.begin(), train_years.end()};
  cfg.knn.test_years = {test_years.begin(), test_years.end()};
  if (!event_types.empty() || !sub_event_types.empty()) {
    cfg.filter.event_types = {event_types.begin(), event_types.end()};
    cfg.filter.sub_event_types = {sub_event_types.begin(), sub_event_types.end()};
  }

  try {
    execute(std::move(cfg), out, err);
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace pvstat::cli
