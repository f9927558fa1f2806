// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pvstat/cli.hpp"
#include "pvstat/clustering.hpp"
#include "pvstat/county_stats.hpp"
#include "pvstat/random.hpp"
#include "pvstat/spatial_stats.hpp"
#include "pvstat/stknn.hpp"
#include "pvstat/timeseries.hpp"

using namespace pvstat;
using geo::GeoPoint;
using geo::LengthUnit;
namespace fs = std::filesystem;

namespace {

constexpr double kPaperArea = 3706269.0;  // sq mi
constexpr double kPaperVariance = 421.96;
constexpr double kPaperMean = 39.30;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.require(false, fmt::format("exception: {}", e.what()));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0) c.require(secs < budget_s, fmt::format("took {:.2f} s > {} s", secs, budget_s));
  failures += !c.ok;
  std::cout << fmt::format("{} criterion {:>2}: {} [{:.2f} s] {}\n", c.ok ? "PASS" : "FAIL", id,
                           title, secs, c.detail)
            << std::flush;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) return false;
  std::map<std::size_t, std::size_t> fwd, back;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [f, fnew] = fwd.emplace(a[i], b[i]);
    auto [r, rnew] = back.emplace(b[i], a[i]);
    if (f->second != b[i] || r->second != a[i]) return false;
  }
  return true;
}

stknn::SpaceTimeEvent random_event(Engine& rng) {
  return {18262 + static_cast<std::int64_t>(uniform_index(rng, 1500)),
          GeoPoint(uniform(rng, 25, 49), uniform(rng, -124, -67)),
          uniform01(rng) < 0.3 ? 1 : 0};
}

int run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

}  // namespace

int main() {
  criterion(1, "Clark-Evans expected variance for n=600, area 3706269", 0, [](Check& c) {
    const auto b = spatial::clark_evans(600, kPaperArea);
    c.require(near(b.expected_variance, kPaperVariance, 0.01),
              fmt::format("variance {:.6f}", b.expected_variance));
    c.note(fmt::format("variance {:.4f}, mean {:.4f}", b.expected_variance, b.expected_mean));
  });

  criterion(2, "Table 1 z-scores", 0, [](Check& c) {
    const std::map<std::string, std::size_t> counts{{"a", 167}, {"b", 102}, {"c", 88},
                                                    {"d", 54},  {"e", 53},  {"f", 44}};
    const std::map<std::string, double> want{{"a", 13.29}, {"b", 7.97}, {"c", 6.82},
                                             {"d", 4.04},  {"e", 3.96}, {"f", 3.22}};
    const auto z = county::z_scores(counts, 4.61, 12.22);
    std::string got;
    for (const auto& [k, v] : want) {
      c.require(near(z.at(k), v, 0.01), fmt::format("z({}) = {:.4f}, want {}", counts.at(k), z.at(k), v));
      got += fmt::format("{:.2f} ", z.at(k));
    }
    c.note("z = " + got);
  });

  criterion(3, "Monte Carlo CSR matches Clark-Evans (600 pts, 30 trials)", 10, [](Check& c) {
    const auto sq = geo::square_region(kPaperArea, LengthUnit::mi);
    const auto mc = spatial::monte_carlo_csr(sq, kPaperArea, 600, 30, 2024, LengthUnit::mi, 0);
    double mean = 0, var = 0;
    for (const auto& t : mc.trials) {
      mean += t.mean;
      var += t.sample_variance;
    }
    mean /= 30;
    var /= 30;
    c.require(std::abs(var / kPaperVariance - 1) <= 0.15, "variance outside 15%");
    c.require(std::abs(mean / kPaperMean - 1) <= 0.05, "mean outside 5%");
    c.note(fmt::format("mean of means {:.3f} ({:+.1f}%), mean of variances {:.3f} ({:+.1f}%)",
                       mean, 100 * (mean / kPaperMean - 1), var, 100 * (var / kPaperVariance - 1)));
  });

  criterion(4, "clustered pattern NN variance > 2x CSR expectation", 5, [](Check& c) {
    const auto sq = geo::square_region(kPaperArea, LengthUnit::mi);
    const auto pts = testing::heavy_tailed_clusters(600, sq.bbox().lat_max, 0.8, 99);
    const auto s = spatial::nn_distances(pts, LengthUnit::mi);
    const double bound = 2 * spatial::clark_evans(600, kPaperArea).expected_variance;
    c.require(s.sample_variance > bound, "variance not above bound");
    c.note(fmt::format("variance {:.2f} vs 2x CSR {:.2f}", s.sample_variance, bound));
  });

  criterion(5, "k-means recovery, monotone objective, thread invariance", 5, [](Check& c) {
    const auto data = testing::gaussian_clusters(
        {GeoPoint(45, -120), GeoPoint(33, -100), GeoPoint(40, -75)}, 100, 0.4, 11);
    int recovered = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto r = cluster::kmeans_geo(data.points, 3, seed);
      recovered += same_partition(r.assignments, data.labels);
      for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
        c.require(r.objective_trace[i] <= r.objective_trace[i - 1],
                  fmt::format("objective rose at seed {} iteration {}", seed, i));
    }
    c.require(recovered >= 1, "no seed recovered the clusters");
    c.note(fmt::format("{}/5 seeds recover exactly", recovered));

    Engine rng(12);
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 4000; ++i) pts.emplace_back(uniform(rng, 25, 49), uniform(rng, -124, -67));
    cluster::KMeansOptions one, many;
    many.threads = 8;
    const auto a = cluster::kmeans_geo(pts, 6, 77, one);
    const auto b = cluster::kmeans_geo(pts, 6, 77, many);
    bool identical = a.assignments == b.assignments && a.objective == b.objective &&
                     a.objective_trace == b.objective_trace && a.centroids == b.centroids;
    c.require(identical, "1-thread and 8-thread runs differ");
    for (std::size_t i = 1; i < a.objective_trace.size(); ++i)
      c.require(a.objective_trace[i] <= a.objective_trace[i - 1], "objective rose (4000 pts)");
  });

  criterion(6, "k-NN matches exhaustive-sort oracle; self-test 100%", 5, [](Check& c) {
    Engine rng(13);
    int agree = 0, total = 0;
    for (int inst = 0; inst < 200; ++inst) {
      const std::size_t n = 5 + uniform_index(rng, 46);
      std::vector<stknn::SpaceTimeEvent> train;
      for (std::size_t i = 0; i < n; ++i) train.push_back(random_event(rng));
      const auto q = random_event(rng);
      for (std::size_t k : {1u, 3u, 5u}) {
        agree += stknn::knn_classify(train, q, k) == testing::knn_by_full_sort(train, q, k);
        ++total;
      }
    }
    c.require(agree == total, fmt::format("{}/{} agree", agree, total));
    std::vector<stknn::SpaceTimeEvent> train;
    for (int i = 0; i < 200; ++i) train.push_back(random_event(rng));
    const std::vector<stknn::SpaceTimeEvent> test(train.begin(), train.begin() + 80);
    const std::vector<std::size_t> k1{1};
    const double acc = stknn::evaluate(train, test, k1).front().accuracy;
    c.require(acc == 100.0, fmt::format("self-test accuracy {}", acc));
    c.note(fmt::format("{}/{} oracle matches, self-test {}%", agree, total, acc));
  });

  criterion(7, "moment conventions", 2, [](Check& c) {
    const std::vector<double> small{1, 2, 3};
    const auto s = county::distribution_stats(small);
    c.require(s.skewness && *s.skewness == 0.0, "skewness({1,2,3}) != 0");
    c.require(s.kurtosis && *s.kurtosis == 1.5, "kurtosis({1,2,3}) != 1.5");
    Engine rng(14);
    std::normal_distribution<double> normal;
    std::vector<double> draws(100000);
    for (auto& d : draws) d = normal(rng);
    const auto n = county::distribution_stats(draws);
    c.require(std::abs(*n.skewness) < 0.05, "normal skewness");
    c.require(std::abs(*n.kurtosis - 3) <= 0.15, "normal kurtosis");
    c.note(fmt::format("normal: skewness {:.4f}, kurtosis {:.4f}", *n.skewness, *n.kurtosis));
  });

  criterion(8, "per-capita ratio", 0, [](Check& c) {
    const double r = county::per_capita_ratio(167, 756242);
    c.require(near(r, 0.220829, 1e-5), fmt::format("ratio {:.7f}", r));
    c.require(county::per_capita_ratio(1, 1000) == 1.0, "ratio(1, 1000) != 1");
    c.note(fmt::format("ratio(167, 756242) = {:.6f}", r));
  });

  criterion(9, "time-series flagging", 0, [](Check& c) {
    timeseries::MonthlySeries spike, flat;
    for (unsigned m = 1; m <= 10; ++m) {
      spike.push_back({{2020, m}, m == 10 ? 100u : 1u});
      flat.push_back({{2020, m}, 7u});
    }
    const auto f = timeseries::flag_outliers(spike, 1.96);
    c.require(f.flagged == std::vector<timeseries::YearMonth>{{2020, 10}},
              "spike month not flagged alone");
    c.require(timeseries::flag_outliers(flat, 1.96).flagged.empty(), "constant series flagged");
    c.note(fmt::format("threshold {:.4f}", f.threshold));
  });

  criterion(10, "every subcommand byte-identical across repeated runs", 30, [](Check& c) {
    testing::TempDir dir("pvstat-accept");
    const auto events = (dir / "events.csv").string();
    const auto bounds = (dir / "counties.geojson").string();
    const auto pop = (dir / "population.csv").string();
    testing::write_synthetic_events(events, 1000, 2024);
    testing::write_synthetic_boundaries(bounds);
    testing::write_synthetic_population(pop);

    const std::vector<std::vector<std::string>> runs{
        {"ingest"},
        {"spatial", "--area", "3706269", "--trials", "10"},
        {"cluster", "--k", "2", "3", "4", "--restarts", "2"},
        {"counties"},
        {"locations"},
        {"ratio"},
        {"timeseries"},
        {"knn"},
        {"terms", "--where", "year=2020", "--top", "50"}};
    std::size_t files = 0;
    for (const auto& sub : runs) {
      for (const char* o : {"a", "b"}) {
        auto args = sub;
        args.insert(args.end(), {"-i", events, "-o", (dir / o).string(), "--boundaries", bounds,
                                 "--population", pop, "--seed", "42", "--run-id", "accept"});
        c.require(run_cli(args) == 0, fmt::format("{} failed", sub.front()));
      }
    }
    std::vector<fs::path> a;
    for (const auto& e : fs::directory_iterator(dir / "a")) a.push_back(e.path());
    std::sort(a.begin(), a.end());
    for (const auto& p : a) {
      const auto q = dir / "b" / p.filename().string();
      c.require(fs::exists(q) && testing::read_text(p) == testing::read_text(q),
                fmt::format("{} differs", p.filename().string()));
      ++files;
    }
    std::size_t b_files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "b")) ++b_files;
    c.require(b_files == files, "different file sets");
    c.require(files >= 17, fmt::format("only {} report files", files));
    c.note(fmt::format("{} report files compared", files));
  });

  std::cout << (failures ? fmt::format("{} criteria FAILED\n", failures)
                         : std::string("all criteria PASS\n"));
  return failures ? 1 : 0;
}
