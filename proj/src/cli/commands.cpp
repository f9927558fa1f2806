#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <random>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "pvstat/cli.hpp"
#include "pvstat/clustering.hpp"
#include "pvstat/county_stats.hpp"
#include "pvstat/error.hpp"
#include "pvstat/geojson.hpp"
#include "pvstat/spatial_stats.hpp"
#include "pvstat/stknn.hpp"
#include "pvstat/text_stats.hpp"
#include "pvstat/timeseries.hpp"
#include "pvstat/version.hpp"
#include "report.hpp"

namespace pvstat::cli {

namespace {

using ingest::EventRecord;

struct Context {
  const RunConfig& cfg;
  std::vector<EventRecord> events;  // after the event filter
  ReportWriter& report;
  std::ostream& out;
  std::ostream& err;
};

std::string stamp_for(const RunConfig& cfg) {
  if (!cfg.run_id.empty()) return cfg.run_id;
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  const auto day = std::chrono::floor<std::chrono::days>(now);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{now - day};
  return fmt::format("{:04d}{:02d}{:02d}T{:02d}{:02d}{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

bool is_randomized(const std::string& sub) { return sub == "spatial" || sub == "cluster"; }

Json snapshot(const RunConfig& cfg, bool seed_generated) {
  Json j;
  j["tool"] = fmt::format("pvstat {}", kVersion);
  j["subcommand"] = cfg.subcommand;
  j["input"] = cfg.input.generic_string();
  const auto& c = cfg.columns;
  j["columns"] = {{"date", c.date},
                  {"latitude", c.latitude},
                  {"longitude", c.longitude},
                  {"event_type", c.event_type},
                  {"sub_event_type", c.sub_event_type},
                  {"fatalities", c.fatalities},
                  {"notes", c.notes},
                  {"source", c.source},
                  {"admin2", c.admin2},
                  {"admin1", c.admin1}};
  if (cfg.filter.accept_all) {
    j["filter"] = "accept-all";
  } else {
    j["filter"] = {{"event_types", cfg.filter.event_types},
                   {"sub_event_types", cfg.filter.sub_event_types}};
  }
  j["strict"] = cfg.strict;
  j["distance_unit"] = geo::to_string(cfg.unit);
  j["lambda"] = cfg.lambda;
  j["location_decimals"] = cfg.decimals;
  j["moments"] = {{"sd", cfg.moments.sample_sd ? "sample (n-1)" : "population (n)"},
                  {"kurtosis", cfg.moments.excess_kurtosis ? "excess (m4/m2^2 - 3)"
                                                           : "raw (m4/m2^2)"},
                  {"skewness", "g1 = m3/m2^1.5"}};
  if (cfg.area)
    j["area"] = {{"value", *cfg.area}, {"unit", fmt::format("sq {}", geo::to_string(cfg.area_unit))}};
  if (cfg.boundaries) j["boundaries"] = cfg.boundaries->generic_string();
  if (cfg.population) j["population"] = cfg.population->generic_string();
  if (is_randomized(cfg.subcommand)) {
    j["seed"] = *cfg.seed;
    j["seed_source"] = seed_generated ? "generated" : "explicit";
  }

  const std::string& sub = cfg.subcommand;
  if (sub == "spatial") {
    Json p{{"monte_carlo", cfg.spatial.monte_carlo}, {"trials", cfg.spatial.trials}};
    if (cfg.spatial.mc_points) p["mc_points"] = *cfg.spatial.mc_points;
    p["region"] = cfg.spatial.region ? cfg.spatial.region->generic_string()
                                     : std::string("square of configured area");
    j["params"] = p;
  } else if (sub == "cluster") {
    j["params"] = {{"k", cfg.cluster.ks},          {"points", cfg.cluster.points},
                   {"max_iter", cfg.cluster.max_iter}, {"tol", cfg.cluster.tol},
                   {"restarts", cfg.cluster.restarts}, {"centroid", "chordal mean"},
                   {"init", "k-means++"}};
  } else if (sub == "counties" || sub == "locations") {
    j["params"] = {{"total_units", cfg.counts.total_units},
                   {"z_threshold", cfg.counts.z_threshold},
                   {"share_thresholds", cfg.counts.share_thresholds}};
  } else if (sub == "ratio") {
    j["params"] = {{"population_years", cfg.ratio.years}, {"top", cfg.ratio.top},
                   {"ratio", "incidents per 1000 residents"}};
  } else if (sub == "timeseries") {
    j["params"] = {{"factor", cfg.timeseries.factor}};
  } else if (sub == "knn") {
    j["params"] = {{"train_years", cfg.knn.train_years},
                   {"test_years", cfg.knn.test_years},
                   {"kmax", cfg.knn.kmax},
                   {"metric", "|days| + lambda * geodesic distance"}};
  } else if (sub == "terms") {
    j["params"] = {{"where", cfg.terms.where},
                   {"stopwords", cfg.terms.stopwords ? cfg.terms.stopwords->generic_string()
                                                     : std::string("built-in english")},
                   {"top", cfg.terms.top}};
  }
  return j;
}

double area_in_unit(const RunConfig& cfg) {
  if (!cfg.area) throw Error(Errc::config_error, "spatial needs --area (study-region area)");
  if (!(*cfg.area > 0)) throw Error(Errc::config_error, "--area must be positive");
  if (cfg.area_unit == cfg.unit) return *cfg.area;
  const double f = geo::kKmPerMile * geo::kKmPerMile;
  return cfg.area_unit == geo::LengthUnit::mi ? *cfg.area * f : *cfg.area / f;
}

Json stats_json(const county::DistributionStats& s) {
  return {{"n", s.n},
          {"mean", s.mean},
          {"sd", json_num(s.sd)},
          {"skewness", json_num(s.skewness)},
          {"kurtosis", json_num(s.kurtosis)},
          {"max", s.max}};
}

// key,value rows for a flat JSON object
std::vector<Row> kv_rows(const Json& obj) {
  std::vector<Row> rows;
  for (const auto& [key, v] : obj.items()) {
    std::string text;
    if (v.is_string()) text = v.get<std::string>();
    else if (v.is_number_float()) text = num(v.get<double>());
    else if (!v.is_null()) text = v.dump();
    rows.push_back({key, text});
  }
  return rows;
}

std::string stat_text(const std::optional<double>& v) {
  return v ? fmt::format("{:.4g}", *v) : std::string("undefined");
}

// ---------------------------------------------------------------- ingest

void cmd_ingest(Context& ctx, const ingest::ParseResult& parsed) {
  const auto& events = ctx.events;
  const auto locations = ingest::unique_locations(events, ctx.cfg.decimals);
  std::int64_t fatalities = 0;
  std::size_t fatal_events = 0;
  for (const auto& e : events) {
    fatalities += e.fatalities;
    fatal_events += e.fatalities > 0;
  }
  std::string first, last;
  if (!events.empty()) {
    auto [lo, hi] = std::minmax_element(events.begin(), events.end(),
                                        [](const EventRecord& a, const EventRecord& b) {
                                          return a.date < b.date;
                                        });
    first = ingest::format_date(lo->date);
    last = ingest::format_date(hi->date);
  }
  const Json summary{{"rows", parsed.records.size() + parsed.errors.size()},
                     {"records", parsed.records.size()},
                     {"row_errors", parsed.errors.size()},
                     {"filtered_events", events.size()},
                     {"unique_locations", locations.size()},
                     {"first_date", first},
                     {"last_date", last},
                     {"total_fatalities", fatalities},
                     {"events_with_fatalities", fatal_events}};

  if (ctx.cfg.format == OutputFormat::json) {
    Json errs = Json::array();
    for (const auto& e : parsed.errors)
      errs.push_back({{"row", e.row}, {"line", e.line}, {"field", e.field}, {"message", e.message}});
    ctx.report.write_json("", {{"summary", summary}, {"row_errors", errs}});
  } else {
    ctx.report.write_csv("", {"key", "value"}, kv_rows(summary));
    std::vector<Row> rows;
    for (const auto& e : parsed.errors)
      rows.push_back({fmt::format("{}", e.row), fmt::format("{}", e.line), e.field, e.message});
    ctx.report.write_csv("errors", {"row", "line", "field", "message"}, rows);
  }
  ctx.out << fmt::format("{} records ({} row errors), {} after filter, {} unique locations\n",
                         parsed.records.size(), parsed.errors.size(), events.size(),
                         locations.size());
}

// ---------------------------------------------------------------- spatial

void cmd_spatial(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto points = ingest::unique_locations(ctx.events, cfg.decimals);
  const auto nn = spatial::nn_distances(points, cfg.unit, cfg.threads);
  const double area = area_in_unit(cfg);
  const auto baseline = spatial::clark_evans(points.size(), area).with_observed(nn.mean);

  std::optional<spatial::MonteCarloResult> mc;
  double mc_mean = 0.0, mc_var = 0.0;
  if (cfg.spatial.monte_carlo) {
    const std::size_t n = cfg.spatial.mc_points.value_or(points.size());
    const auto region = cfg.spatial.region ? geo::load_region(*cfg.spatial.region)
                                           : std::vector{geo::square_region(area, cfg.unit)};
    mc = spatial::monte_carlo_csr(region, area, n, cfg.spatial.trials, *cfg.seed, cfg.unit,
                                  cfg.threads);
    for (const auto& t : mc->trials) {
      mc_mean += t.mean;
      mc_var += t.sample_variance;
    }
    mc_mean /= static_cast<double>(mc->trials.size());
    mc_var /= static_cast<double>(mc->trials.size());
  }

  Json summary{{"n_points", points.size()},
               {"observed_mean", nn.mean},
               {"observed_variance", nn.sample_variance},
               {"area", area},
               {"density", baseline.density},
               {"expected_mean", baseline.expected_mean},
               {"expected_variance", baseline.expected_variance},
               {"clark_evans_ratio", *baseline.ratio}};
  if (mc) {
    summary["mc_points"] = cfg.spatial.mc_points.value_or(points.size());
    summary["mc_trials"] = mc->trials.size();
    summary["mc_mean_of_means"] = mc_mean;
    summary["mc_mean_of_variances"] = mc_var;
  }

  if (cfg.format == OutputFormat::json) {
    Json d = Json::array();
    for (std::size_t i = 0; i < points.size(); ++i)
      d.push_back({{"lat", points[i].lat()}, {"lon", points[i].lon()}, {"nn", nn.distances[i]}});
    Json body{{"summary", summary}, {"nn_distances", d}};
    if (mc) {
      Json trials = Json::array();
      for (const auto& t : mc->trials)
        trials.push_back({{"mean", t.mean}, {"variance", t.sample_variance}});
      body["monte_carlo"] = trials;
    }
    ctx.report.write_json("", body);
  } else {
    std::vector<Row> rows;
    for (std::size_t i = 0; i < points.size(); ++i)
      rows.push_back({fmt::format("{}", i), num(points[i].lat()), num(points[i].lon()),
                      num(nn.distances[i])});
    ctx.report.write_csv("nn", {"index", "lat", "lon", "nn_distance"}, rows);
    ctx.report.write_csv("summary", {"key", "value"}, kv_rows(summary));
    if (mc) {
      rows.clear();
      for (std::size_t t = 0; t < mc->trials.size(); ++t)
        rows.push_back({fmt::format("{}", t), num(mc->trials[t].mean),
                        num(mc->trials[t].sample_variance)});
      ctx.report.write_csv("mc", {"trial", "mean", "variance"}, rows);
    }
  }

  const auto u = geo::to_string(cfg.unit);
  ctx.out << fmt::format("{} locations: NN mean {:.4f} {}, variance {:.4f}\n", points.size(),
                         nn.mean, u, nn.sample_variance);
  ctx.out << fmt::format("CSR expectation: mean {:.4f}, variance {:.4f}, R = {:.4f}\n",
                         baseline.expected_mean, baseline.expected_variance, *baseline.ratio);
  if (mc)
    ctx.out << fmt::format("Monte Carlo ({} trials): mean {:.4f}, variance {:.4f}\n",
                           mc->trials.size(), mc_mean, mc_var);
}

// ---------------------------------------------------------------- cluster

void cmd_cluster(Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<geo::GeoPoint> points;
  if (cfg.cluster.points == "locations") {
    points = ingest::unique_locations(ctx.events, cfg.decimals);
  } else if (cfg.cluster.points == "incidents") {
    for (const auto& e : ctx.events) points.push_back(e.point);
  } else {
    throw Error(Errc::config_error,
                fmt::format("--points must be 'locations' or 'incidents', got '{}'",
                            cfg.cluster.points));
  }
  cluster::KMeansOptions opt;
  opt.max_iter = cfg.cluster.max_iter;
  opt.tol = cfg.cluster.tol;
  opt.restarts = cfg.cluster.restarts;
  opt.unit = cfg.unit;
  opt.threads = cfg.threads;

  Json all;
  for (std::size_t k : cfg.cluster.ks) {
    const auto result = cluster::kmeans_geo(points, k, *cfg.seed, opt);
    const auto summary = cluster::cluster_summary(result, points, cfg.unit);

    Json centroids = Json::array();
    for (std::size_t c = 0; c < k; ++c)
      centroids.push_back({{"cluster", c},
                           {"lat", summary[c].centroid.lat()},
                           {"lon", summary[c].centroid.lon()},
                           {"size", summary[c].size},
                           {"mean_distance", summary[c].mean_distance}});
    Json kj{{"k", k},
            {"objective", result.objective},
            {"iterations", result.iterations},
            {"converged", result.converged},
            {"centroids", centroids}};

    std::vector<std::string> sizes;
    for (const auto& s : summary) sizes.push_back(fmt::format("{}", s.size));
    ctx.out << fmt::format("k={}: sizes [{}], objective {:.6g}, {} iterations{}\n", k,
                           fmt::join(sizes, ", "), result.objective, result.iterations,
                           result.converged ? "" : " (not converged)");

    if (cfg.format == OutputFormat::json) {
      Json assign = Json::array();
      for (std::size_t i = 0; i < points.size(); ++i)
        assign.push_back({{"index", i},
                          {"lat", points[i].lat()},
                          {"lon", points[i].lon()},
                          {"cluster", result.assignments[i]}});
      kj["assignments"] = assign;
      all.push_back(kj);
    } else {
      std::vector<Row> rows;
      for (std::size_t i = 0; i < points.size(); ++i)
        rows.push_back({fmt::format("{}", i), num(points[i].lat()), num(points[i].lon()),
                        fmt::format("{}", result.assignments[i])});
      ctx.report.write_csv(fmt::format("k{}_assignments", k), {"index", "lat", "lon", "cluster"},
                           rows);
      ctx.report.write_json(fmt::format("k{}_centroids", k), kj);
    }
  }
  if (cfg.format == OutputFormat::json) ctx.report.write_json("", Json{{"runs", all}});
}

// ------------------------------------------------------ counties/locations

struct CountReport {
  county::KeyedCounts counts;
  county::DistributionStats stats;
  std::map<std::string, double> z;
  std::vector<std::pair<std::string, std::size_t>> ordered;  // incidents desc, key asc
};

CountReport build_counts(Context& ctx, std::span<const std::optional<std::string>> keys) {
  CountReport r;
  r.counts = county::count_by_key(keys);
  if (r.counts.counts.empty())
    throw Error(Errc::insufficient_data, "no events could be keyed");
  r.stats = county::distribution_stats(county::count_values(r.counts), ctx.cfg.moments);
  if (r.stats.sd && *r.stats.sd > 0)
    r.z = county::z_scores(r.counts.counts, r.stats.mean, *r.stats.sd);
  else
    ctx.err << "warning: count standard deviation is undefined or zero; z-scores omitted\n";
  r.ordered.assign(r.counts.counts.begin(), r.counts.counts.end());
  std::stable_sort(r.ordered.begin(), r.ordered.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return r;
}

std::string z_text(const CountReport& r, const std::string& key) {
  auto it = r.z.find(key);
  return it == r.z.end() ? std::string{} : num(it->second);
}

bool is_outlier(const CountReport& r, const std::string& key, double threshold) {
  auto it = r.z.find(key);
  return it != r.z.end() && it->second >= threshold;
}

Json count_summary(const CountReport& r, std::size_t n_outliers) {
  Json s = stats_json(r.stats);
  s["keys"] = r.counts.counts.size();
  s["unassigned_events"] = r.counts.unassigned;
  s["outliers"] = n_outliers;
  return s;
}

void print_count_summary(Context& ctx, const CountReport& r, std::string_view what) {
  ctx.out << fmt::format(
      "{} {} with incidents ({} events unassigned): mean {:.4g}, sd {}, skewness {}, "
      "kurtosis {}, max {}\n",
      r.counts.counts.size(), what, r.counts.unassigned, r.stats.mean, stat_text(r.stats.sd),
      stat_text(r.stats.skewness), stat_text(r.stats.kurtosis), r.stats.max);
}

std::vector<county::CountyBoundary> require_boundaries(const RunConfig& cfg, std::string_view sub) {
  if (!cfg.boundaries) throw Error(Errc::config_error, fmt::format("{} needs --boundaries", sub));
  return county::load_boundaries(*cfg.boundaries);
}

void cmd_counties(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto boundaries = require_boundaries(cfg, "counties");
  std::map<std::string, const county::CountyBoundary*> by_fips;
  for (const auto& b : boundaries) by_fips.emplace(b.fips, &b);

  const auto keys = county::county_keys(ctx.events, boundaries, cfg.threads);
  const auto r = build_counts(ctx, keys);

  std::vector<Row> rows;
  std::size_t outliers = 0;
  for (const auto& [fips, n] : r.ordered) {
    const auto* b = by_fips.at(fips);
    const bool out = is_outlier(r, fips, cfg.counts.z_threshold);
    outliers += out;
    rows.push_back({fips, b->name, b->state, fmt::format("{}", n), z_text(r, fips),
                    out ? "1" : "0"});
  }
  Json summary = count_summary(r, outliers);
  summary["total_units"] = cfg.counts.total_units;
  for (std::size_t t : cfg.counts.share_thresholds) {
    const auto hits = std::count_if(r.counts.counts.begin(), r.counts.counts.end(),
                                    [&](const auto& kv) { return kv.second >= t; });
    summary[fmt::format("units_with_at_least_{}", t)] = hits;
    summary[fmt::format("share_pct_with_at_least_{}", t)] =
        county::share_with_at_least(r.counts.counts, cfg.counts.total_units, t);
  }

  const Row header{"fips", "name", "state", "incidents", "z_score", "outlier"};
  if (cfg.format == OutputFormat::json) {
    Json table = Json::array();
    for (const auto& row : rows)
      table.push_back({{"fips", row[0]},
                       {"name", row[1]},
                       {"state", row[2]},
                       {"incidents", std::stoull(row[3])},
                       {"z_score", row[4].empty() ? Json(nullptr) : Json(std::stod(row[4]))},
                       {"outlier", row[5] == "1"}});
    ctx.report.write_json("", {{"summary", summary}, {"counties", table}});
  } else {
    ctx.report.write_csv("", header, rows);
    ctx.report.write_csv("summary", {"key", "value"}, kv_rows(summary));
  }
  print_count_summary(ctx, r, "counties");
  for (const auto& row : rows)
    if (row[5] == "1")
      ctx.out << fmt::format("  {} {} ({}): {} incidents, z = {}\n", row[0], row[1], row[2],
                             row[3], row[4]);
}

void cmd_locations(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto keys = county::location_keys(ctx.events, cfg.decimals);
  const auto r = build_counts(ctx, keys);

  std::vector<Row> rows;
  std::size_t outliers = 0;
  for (const auto& [key, n] : r.ordered) {
    const auto comma = key.find(',');
    const bool out = is_outlier(r, key, cfg.counts.z_threshold);
    outliers += out;
    rows.push_back({key.substr(0, comma), key.substr(comma + 1), fmt::format("{}", n),
                    z_text(r, key), out ? "1" : "0"});
  }
  const Json summary = count_summary(r, outliers);
  if (cfg.format == OutputFormat::json) {
    Json table = Json::array();
    for (const auto& row : rows)
      table.push_back({{"latitude", std::stod(row[0])},
                       {"longitude", std::stod(row[1])},
                       {"incidents", std::stoull(row[2])},
                       {"z_score", row[3].empty() ? Json(nullptr) : Json(std::stod(row[3]))},
                       {"outlier", row[4] == "1"}});
    ctx.report.write_json("", {{"summary", summary}, {"locations", table}});
  } else {
    ctx.report.write_csv("", {"latitude", "longitude", "incidents", "z_score", "outlier"}, rows);
    ctx.report.write_csv("summary", {"key", "value"}, kv_rows(summary));
  }
  print_count_summary(ctx, r, "locations");
  for (const auto& row : rows)
    if (row[4] == "1")
      ctx.out << fmt::format("  ({}, {}): {} incidents, z = {}\n", row[0], row[1], row[2], row[3]);
}

// ---------------------------------------------------------------- ratio

void cmd_ratio(Context& ctx) {
  const auto& cfg = ctx.cfg;
  auto boundaries = require_boundaries(cfg, "ratio");
  if (!cfg.population) throw Error(Errc::config_error, "ratio needs --population");
  {
    std::ifstream in(*cfg.population);
    if (!in) throw Error(Errc::io_error, "cannot open " + cfg.population->string());
    const auto unmatched = county::attach_population(in, boundaries);
    if (unmatched)
      ctx.err << fmt::format("warning: {} population rows matched no boundary\n", unmatched);
  }
  std::map<std::string, const county::CountyBoundary*> by_fips;
  for (const auto& b : boundaries) by_fips.emplace(b.fips, &b);

  const auto counts = county::count_by_key(county::county_keys(ctx.events, boundaries, cfg.threads));
  std::map<std::string, double> ratios, incidents, avg_pop;
  std::map<std::string, std::string> missing;
  std::vector<std::string> no_population;
  for (const auto& [fips, n] : counts.counts) {
    const auto avg = county::average_population(*by_fips.at(fips), cfg.ratio.years);
    if (!avg) {
      no_population.push_back(fips);
      continue;
    }
    if (!avg->missing_years.empty()) {
      missing[fips] = fmt::format("{}", fmt::join(avg->missing_years, " "));
      ctx.err << fmt::format("warning: {} lacks population estimates for {}\n", fips,
                             missing[fips]);
    }
    ratios[fips] = county::per_capita_ratio(static_cast<double>(n), avg->value);
    incidents[fips] = static_cast<double>(n);
    avg_pop[fips] = avg->value;
  }
  for (const auto& f : no_population)
    ctx.err << fmt::format("warning: {} has incidents but no population estimate; skipped\n", f);
  if (ratios.empty()) throw Error(Errc::insufficient_data, "no county has both incidents and population");

  const auto by_ratio = county::rank_by(ratios, true);
  const auto by_incidents = county::rank_by(incidents, true);
  std::map<std::string, std::size_t> ratio_rank, incident_rank;
  for (const auto& e : by_ratio) ratio_rank[e.key] = e.rank;
  for (const auto& e : by_incidents) incident_rank[e.key] = e.rank;

  std::vector<Row> rows;
  for (const auto& e : by_ratio) {
    const auto* b = by_fips.at(e.key);
    rows.push_back({fmt::format("{}", e.rank), e.key, b->name, b->state,
                    fmt::format("{}", static_cast<std::size_t>(incidents[e.key])),
                    num(avg_pop[e.key]), num(e.value),
                    fmt::format("{}", incident_rank[e.key]),
                    missing.count(e.key) ? missing[e.key] : std::string{}});
  }
  std::vector<Row> top;
  for (const auto& e : by_incidents) {
    if (top.size() >= cfg.ratio.top) break;
    const auto* b = by_fips.at(e.key);
    top.push_back({fmt::format("{}", e.rank), e.key, b->name, b->state,
                   fmt::format("{}", static_cast<std::size_t>(e.value)),
                   fmt::format("{}", ratio_rank[e.key])});
  }

  const Row header{"ratio_rank", "fips",  "name",          "state",         "incidents",
                   "avg_population", "ratio", "incident_rank", "missing_years"};
  const Row top_header{"incident_rank", "fips", "name", "state", "incidents", "ratio_rank"};
  if (cfg.format == OutputFormat::json) {
    auto to_json = [](const Row& h, const std::vector<Row>& rs) {
      Json arr = Json::array();
      for (const auto& r : rs) {
        Json o;
        for (std::size_t i = 0; i < h.size(); ++i) o[h[i]] = r[i];
        arr.push_back(o);
      }
      return arr;
    };
    ctx.report.write_json("", {{"ratios", to_json(header, rows)},
                               {"top_by_incidents", to_json(top_header, top)},
                               {"no_population", no_population}});
  } else {
    ctx.report.write_csv("", header, rows);
    ctx.report.write_csv("top", top_header, top);
  }
  ctx.out << fmt::format("{} counties ranked by incidents per 1000 residents\n", rows.size());
  for (std::size_t i = 0; i < std::min<std::size_t>(10, rows.size()); ++i)
    ctx.out << fmt::format("  {:>3}. {} {} ({}): ratio {}, {} incidents\n", rows[i][0],
                           rows[i][1], rows[i][2], rows[i][3], rows[i][6], rows[i][4]);
}

// ---------------------------------------------------------------- timeseries

void cmd_timeseries(Context& ctx) {
  const double factor = ctx.cfg.timeseries.factor;
  const auto series = timeseries::monthly_counts(ctx.events);
  const auto flags = timeseries::flag_outliers(series, factor);
  std::vector<Row> rows;
  for (const auto& m : series) {
    const bool flagged =
        std::find(flags.flagged.begin(), flags.flagged.end(), m.month) != flags.flagged.end();
    rows.push_back({fmt::format("{}", m.month.year), fmt::format("{}", m.month.month),
                    fmt::format("{}", m.count), flagged ? "1" : "0"});
  }
  const Json summary{{"months", series.size()},   {"mean", flags.mean},
                     {"sd", flags.sd},              {"factor", factor},
                     {"threshold", flags.threshold}, {"flagged", flags.flagged.size()}};
  if (ctx.cfg.format == OutputFormat::json) {
    Json arr = Json::array();
    for (std::size_t i = 0; i < series.size(); ++i)
      arr.push_back({{"year", series[i].month.year},
                     {"month", series[i].month.month},
                     {"count", series[i].count},
                     {"flagged", rows[i][3] == "1"}});
    ctx.report.write_json("", {{"summary", summary}, {"series", arr}});
  } else {
    ctx.report.write_csv("", {"year", "month", "count", "flagged"}, rows);
    ctx.report.write_csv("summary", {"key", "value"}, kv_rows(summary));
  }
  ctx.out << fmt::format("{} months, mean {:.3f}, sd {:.3f}, threshold {:.3f}\n", series.size(),
                         flags.mean, flags.sd, flags.threshold);
  for (const auto& m : flags.flagged) ctx.out << fmt::format("  flagged {:04d}-{:02d}\n", m.year, m.month);
}

// ---------------------------------------------------------------- knn

void cmd_knn(Context& ctx) {
  const auto& cfg = ctx.cfg;
  auto [train, test] = stknn::split_by_year(ctx.events, cfg.knn.train_years, cfg.knn.test_years);
  if (train.empty() || test.empty())
    throw Error(Errc::insufficient_data,
                fmt::format("knn: {} training and {} test events after the year split",
                            train.size(), test.size()));
  const auto ks = stknn::odd_ks(cfg.knn.kmax);
  const auto curve = stknn::evaluate(train, test, ks, {cfg.unit, cfg.lambda}, cfg.threads);

  Json confusion = Json::array();
  for (const auto& p : curve)
    confusion.push_back({{"k", p.k},
                         {"tp", p.confusion.tp},
                         {"tn", p.confusion.tn},
                         {"fp", p.confusion.fp},
                         {"fn", p.confusion.fn}});
  if (cfg.format == OutputFormat::json) {
    Json arr = Json::array();
    for (const auto& p : curve)
      arr.push_back({{"k", p.k}, {"accuracy", p.accuracy}, {"n_test", p.n_test}});
    ctx.report.write_json("", {{"n_train", train.size()}, {"curve", arr}, {"confusion", confusion}});
  } else {
    std::vector<Row> rows;
    for (const auto& p : curve)
      rows.push_back({fmt::format("{}", p.k), num(p.accuracy), fmt::format("{}", p.n_test)});
    ctx.report.write_csv("", {"k", "accuracy", "n_test"}, rows);
    ctx.report.write_json("confusion", {{"n_train", train.size()}, {"confusion", confusion}});
  }
  ctx.out << fmt::format("{} training / {} test events (unit {}, lambda {})\n", train.size(),
                         test.size(), geo::to_string(cfg.unit), cfg.lambda);
  for (const auto& p : curve) ctx.out << fmt::format("  k={:>3}: {:.2f}%\n", p.k, p.accuracy);
}

// ---------------------------------------------------------------- terms

std::vector<EventRecord> apply_where(Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<EventRecord> events = ctx.events;
  std::optional<std::vector<county::CountyBoundary>> boundaries;
  for (const auto& clause : cfg.terms.where) {
    const auto eq = clause.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::config_error, fmt::format("--where '{}' is not key=value", clause));
    const std::string key = clause.substr(0, eq), value = clause.substr(eq + 1);
    std::function<bool(const EventRecord&)> keep;
    if (key == "location") {
      const auto comma = value.find(',');
      if (comma == std::string::npos)
        throw Error(Errc::config_error, "--where location=LAT,LON");
      const geo::GeoPoint p(std::stod(value.substr(0, comma)), std::stod(value.substr(comma + 1)));
      const std::string want = county::location_key(p, cfg.decimals);
      keep = [&, want](const EventRecord& e) {
        return county::location_key(e.point, cfg.decimals) == want;
      };
    } else if (key == "county") {
      if (!boundaries) boundaries = require_boundaries(cfg, "terms --where county=");
      keep = [&, value](const EventRecord& e) {
        return county::assign_county(e.point, *boundaries, e.county_hint) == value;
      };
    } else if (key == "event_type") {
      keep = [value](const EventRecord& e) { return e.event_type == value; };
    } else if (key == "sub_event_type") {
      keep = [value](const EventRecord& e) { return e.sub_event_type == value; };
    } else if (key == "admin1") {
      keep = [value](const EventRecord& e) { return e.state == value; };
    } else if (key == "admin2") {
      keep = [value](const EventRecord& e) { return e.county_hint == value; };
    } else if (key == "year") {
      const int y = std::stoi(value);
      keep = [y](const EventRecord& e) { return static_cast<int>(e.date.year()) == y; };
    } else if (key == "month") {
      const auto d = ingest::parse_date(value + "-01");
      if (!d) throw Error(Errc::config_error, "--where month=YYYY-MM");
      keep = [d](const EventRecord& e) {
        return e.date.year() == d->year() && e.date.month() == d->month();
      };
    } else {
      throw Error(Errc::config_error, fmt::format("--where: unknown key '{}'", key));
    }
    std::erase_if(events, [&](const EventRecord& e) { return !keep(e); });
  }
  return events;
}

void cmd_terms(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto events = apply_where(ctx);
  text::StopWords custom;
  if (cfg.terms.stopwords) {
    std::ifstream in(*cfg.terms.stopwords);
    if (!in) throw Error(Errc::io_error, "cannot open " + cfg.terms.stopwords->string());
    custom = text::load_stopwords(in);
  }
  const auto& stop = cfg.terms.stopwords ? custom : text::default_stopwords();
  auto tf = text::term_frequencies(events, stop, cfg.threads);
  if (cfg.terms.top && tf.size() > cfg.terms.top) tf.resize(cfg.terms.top);

  if (cfg.format == OutputFormat::json) {
    Json arr = Json::array();
    for (const auto& t : tf) arr.push_back({{"term", t.term}, {"count", t.count}});
    ctx.report.write_json("", {{"events", events.size()}, {"terms", arr}});
  } else {
    std::vector<Row> rows;
    for (const auto& t : tf) rows.push_back({t.term, fmt::format("{}", t.count)});
    ctx.report.write_csv("", {"term", "count"}, rows);
  }
  ctx.out << fmt::format("{} events matched, {} distinct terms\n", events.size(), tf.size());
  for (std::size_t i = 0; i < std::min<std::size_t>(15, tf.size()); ++i)
    ctx.out << fmt::format("  {:<20} {}\n", tf[i].term, tf[i].count);
}

}  // namespace

std::vector<std::filesystem::path> execute(RunConfig cfg, std::ostream& out,
                                           std::ostream& err) {
  auto check_exists = [](const std::optional<std::filesystem::path>& p, std::string_view what) {
    if (p && !std::filesystem::exists(*p))
      throw Error(Errc::io_error, fmt::format("{} not found: {}", what, p->string()));
  };
  if (cfg.input.empty()) throw Error(Errc::config_error, "--input is required");
  check_exists(cfg.input, "input");
  check_exists(cfg.boundaries, "boundaries");
  check_exists(cfg.population, "population");
  check_exists(cfg.spatial.region, "region");
  check_exists(cfg.terms.stopwords, "stopwords");

  bool seed_generated = false;
  if (is_randomized(cfg.subcommand) && !cfg.seed) {
    std::random_device rd;
    cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
    seed_generated = true;
    err << fmt::format("note: no --seed given; using generated seed {}\n", *cfg.seed);
  }

  std::ifstream in(cfg.input, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + cfg.input.string());
  const auto parsed = ingest::parse_events(in, cfg.columns, cfg.strict);
  for (const auto& e : parsed.errors)
    err << fmt::format("row {} (line {}){}: {}\n", e.row, e.line,
                       e.field.empty() ? "" : fmt::format(", field '{}'", e.field), e.message);

  ReportWriter report(cfg.out_dir, cfg.subcommand, stamp_for(cfg), snapshot(cfg, seed_generated));
  Context ctx{cfg, ingest::filter_events(parsed.records, cfg.filter), report, out, err};

  const auto& sub = cfg.subcommand;
  if (sub == "ingest") cmd_ingest(ctx, parsed);
  else if (sub == "spatial") cmd_spatial(ctx);
  else if (sub == "cluster") cmd_cluster(ctx);
  else if (sub == "counties") cmd_counties(ctx);
  else if (sub == "locations") cmd_locations(ctx);
  else if (sub == "ratio") cmd_ratio(ctx);
  else if (sub == "timeseries") cmd_timeseries(ctx);
  else if (sub == "knn") cmd_knn(ctx);
  else if (sub == "terms") cmd_terms(ctx);
  else throw Error(Errc::config_error, fmt::format("unknown subcommand '{}'", sub));

  for (const auto& p : report.written()) out << "wrote " << p.generic_string() << '\n';
  return report.written();
}

}  // namespace pvstat::cli
