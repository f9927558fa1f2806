#include <fstream>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pvstat/cli.hpp"
#include "pvstat/clustering.hpp"
#include "pvstat/county_stats.hpp"
#include "pvstat/error.hpp"
#include "pvstat/ingest.hpp"
#include "pvstat/spatial_stats.hpp"
#include "pvstat/stknn.hpp"
#include "pvstat/text_stats.hpp"
#include "pvstat/timeseries.hpp"
#include "pvstat/version.hpp"

namespace py = pybind11;
using namespace pvstat;

namespace {

using LatLon = std::pair<double, double>;

std::vector<geo::GeoPoint> to_points(const std::vector<LatLon>& xs) {
  std::vector<geo::GeoPoint> out;
  out.reserve(xs.size());
  for (const auto& [lat, lon] : xs) out.emplace_back(lat, lon);
  return out;
}

LatLon to_pair(const geo::GeoPoint& p) { return {p.lat(), p.lon()}; }

geo::LengthUnit unit_of(const std::string& s) { return geo::parse_length_unit(s); }

py::dict event_dict(const ingest::EventRecord& e) {
  py::dict d;
  d["date"] = ingest::format_date(e.date);
  d["latitude"] = e.point.lat();
  d["longitude"] = e.point.lon();
  d["event_type"] = e.event_type;
  d["sub_event_type"] = e.sub_event_type;
  d["fatalities"] = e.fatalities;
  d["notes"] = e.notes;
  d["source"] = e.source;
  d["admin2"] = e.county_hint;
  d["admin1"] = e.state;
  return d;
}

// "YYYY-MM-DD" date plus (lat, lon) and a 0/1 label
stknn::SpaceTimeEvent to_st(const std::tuple<std::string, double, double, int>& t) {
  const auto& [date, lat, lon, label] = t;
  const auto d = ingest::parse_date(date);
  if (!d) throw Error(Errc::parameter_error, "bad date '" + date + "'");
  return {ingest::to_epoch_day(*d), geo::GeoPoint(lat, lon), label};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "pvstat core bindings";
  m.attr("__version__") = std::string(kVersion);

  py::exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = py::module_::import("pvstat._core").attr("Error");
      py::object instance = type(e.what());
      instance.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(type.ptr(), instance.ptr());
    }
  });

  m.attr("EARTH_RADIUS_KM") = geo::kEarthRadiusKm;

  m.def(
      "geo_distance",
      [](LatLon a, LatLon b, const std::string& unit) {
        return geo::geo_distance({a.first, a.second}, {b.first, b.second}, unit_of(unit));
      },
      py::arg("a"), py::arg("b"), py::arg("unit") = "km");

  m.def(
      "point_in_polygon",
      [](LatLon p, const std::vector<std::vector<LatLon>>& rings) {
        std::vector<geo::RegionPolygon::Ring> rs;
        for (const auto& r : rings) rs.push_back(to_points(r));
        return geo::point_in_polygon({p.first, p.second}, geo::RegionPolygon(std::move(rs)));
      },
      py::arg("point"), py::arg("rings"));

  m.def(
      "parse_events",
      [](const std::filesystem::path& path, bool strict) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
        const auto r = ingest::parse_events(in, {}, strict);
        py::list events, errors;
        for (const auto& e : r.records) events.append(event_dict(e));
        for (const auto& e : r.errors)
          errors.append(py::dict(py::arg("row") = e.row, py::arg("line") = e.line,
                                 py::arg("field") = e.field, py::arg("message") = e.message));
        return py::make_tuple(events, errors);
      },
      py::arg("path"), py::arg("strict") = false,
      "Returns (events, row_errors) as lists of dicts.");

  m.def(
      "nn_distances",
      [](const std::vector<LatLon>& pts, const std::string& unit, unsigned threads) {
        const auto s = spatial::nn_distances(to_points(pts), unit_of(unit), threads);
        return py::dict(py::arg("distances") = s.distances, py::arg("mean") = s.mean,
                        py::arg("sample_variance") = s.sample_variance);
      },
      py::arg("points"), py::arg("unit") = "km", py::arg("threads") = 1);

  m.def(
      "clark_evans",
      [](std::size_t n, double area) {
        const auto b = spatial::clark_evans(n, area);
        return py::dict(py::arg("density") = b.density, py::arg("expected_mean") = b.expected_mean,
                        py::arg("expected_variance") = b.expected_variance);
      },
      py::arg("n"), py::arg("area"));

  m.def(
      "monte_carlo_csr",
      [](double area, std::size_t n, std::size_t trials, std::uint64_t seed,
         const std::string& unit, unsigned threads) {
        const auto u = unit_of(unit);
        const auto r =
            spatial::monte_carlo_csr(geo::square_region(area, u), area, n, trials, seed, u, threads);
        std::vector<std::pair<double, double>> out;
        for (const auto& t : r.trials) out.emplace_back(t.mean, t.sample_variance);
        return out;
      },
      py::arg("area"), py::arg("n"), py::arg("trials"), py::arg("seed"), py::arg("unit") = "km",
      py::arg("threads") = 1,
      "Per-trial (mean, sample variance) of NN distances for CSR in a square region.");

  m.def(
      "kmeans_geo",
      [](const std::vector<LatLon>& pts, std::size_t k, std::uint64_t seed, std::size_t max_iter,
         double tol, std::size_t restarts, const std::string& unit, unsigned threads) {
        cluster::KMeansOptions opt{max_iter, tol, restarts, unit_of(unit), threads};
        const auto r = cluster::kmeans_geo(to_points(pts), k, seed, opt);
        std::vector<LatLon> centroids;
        for (const auto& c : r.centroids) centroids.push_back(to_pair(c));
        return py::dict(py::arg("assignments") = r.assignments, py::arg("centroids") = centroids,
                        py::arg("objective") = r.objective, py::arg("iterations") = r.iterations,
                        py::arg("converged") = r.converged,
                        py::arg("objective_trace") = r.objective_trace);
      },
      py::arg("points"), py::arg("k"), py::arg("seed"), py::arg("max_iter") = 200,
      py::arg("tol") = 1e-6, py::arg("restarts") = 1, py::arg("unit") = "km",
      py::arg("threads") = 1);

  m.def(
      "distribution_stats",
      [](const std::vector<double>& values, bool sample_sd, bool excess_kurtosis) {
        const auto s = county::distribution_stats(values, {sample_sd, excess_kurtosis});
        return py::dict(py::arg("n") = s.n, py::arg("mean") = s.mean, py::arg("max") = s.max,
                        py::arg("sd") = s.sd, py::arg("skewness") = s.skewness,
                        py::arg("kurtosis") = s.kurtosis);
      },
      py::arg("values"), py::arg("sample_sd") = true, py::arg("excess_kurtosis") = false);

  m.def("z_scores", &county::z_scores, py::arg("counts"), py::arg("mean"), py::arg("sd"));
  m.def("share_with_at_least", &county::share_with_at_least, py::arg("counts"),
        py::arg("total_units"), py::arg("threshold"));
  m.def("per_capita_ratio", &county::per_capita_ratio, py::arg("count"),
        py::arg("avg_population"));

  m.def(
      "flag_outliers",
      [](const std::vector<std::size_t>& counts, double factor) {
        timeseries::MonthlySeries s;
        for (std::size_t i = 0; i < counts.size(); ++i)
          s.push_back({{static_cast<int>(i / 12), static_cast<unsigned>(i % 12 + 1)}, counts[i]});
        const auto f = timeseries::flag_outliers(s, factor);
        std::vector<std::size_t> idx;
        for (const auto& ym : f.flagged) idx.push_back(ym.year * 12 + ym.month - 1);
        return py::dict(py::arg("mean") = f.mean, py::arg("sd") = f.sd,
                        py::arg("threshold") = f.threshold, py::arg("flagged") = idx);
      },
      py::arg("counts"), py::arg("factor") = 1.96,
      "Flags positions of a consecutive monthly count series.");

  m.def(
      "knn_classify",
      [](const std::vector<std::tuple<std::string, double, double, int>>& train,
         const std::tuple<std::string, double, double, int>& query, std::size_t k, double lambda,
         const std::string& unit) {
        std::vector<stknn::SpaceTimeEvent> t;
        for (const auto& e : train) t.push_back(to_st(e));
        return stknn::knn_classify(t, to_st(query), k, {unit_of(unit), lambda});
      },
      py::arg("train"), py::arg("query"), py::arg("k"), py::arg("lambda_") = 1.0,
      py::arg("unit") = "km",
      "Events are (YYYY-MM-DD, lat, lon, label) tuples; the query label is ignored.");

  m.def(
      "knn_evaluate",
      [](const std::vector<std::tuple<std::string, double, double, int>>& train,
         const std::vector<std::tuple<std::string, double, double, int>>& test, std::size_t kmax,
         double lambda, const std::string& unit, unsigned threads) {
        std::vector<stknn::SpaceTimeEvent> tr, te;
        for (const auto& e : train) tr.push_back(to_st(e));
        for (const auto& e : test) te.push_back(to_st(e));
        const auto curve =
            stknn::evaluate(tr, te, stknn::odd_ks(kmax), {unit_of(unit), lambda}, threads);
        std::vector<std::pair<std::size_t, double>> out;
        for (const auto& p : curve) out.emplace_back(p.k, p.accuracy);
        return out;
      },
      py::arg("train"), py::arg("test"), py::arg("kmax"), py::arg("lambda_") = 1.0,
      py::arg("unit") = "km", py::arg("threads") = 1,
      "(k, accuracy %) for every odd k up to kmax.");

  m.def("tokenize", &text::tokenize, py::arg("text"));
  m.def(
      "term_frequencies",
      [](const std::vector<std::string>& notes, std::optional<text::StopWords> stopwords) {
        std::vector<std::pair<std::string, std::size_t>> out;
        for (const auto& tc :
             text::term_frequencies(notes, stopwords ? *stopwords : text::default_stopwords()))
          out.emplace_back(tc.term, tc.count);
        return out;
      },
      py::arg("notes"), py::arg("stopwords") = py::none());
  m.def("default_stopwords", &text::default_stopwords);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the pvstat CLI in-process; returns (exit_code, stdout, stderr).");
}
