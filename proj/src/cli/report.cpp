#include "report.hpp"

#include <fstream>

#include <fmt/format.h>

#include "pvstat/csv.hpp"
#include "pvstat/error.hpp"

namespace pvstat::cli {

std::string num(double v) { return fmt::format("{}", v); }

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string{}; }

Json json_num(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

ReportWriter::ReportWriter(std::filesystem::path dir, std::string subcommand, std::string stamp,
                           Json snapshot)
    : dir_(std::move(dir)),
      subcommand_(std::move(subcommand)),
      stamp_(std::move(stamp)),
      snapshot_(std::move(snapshot)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec)
    throw Error(Errc::io_error,
                fmt::format("cannot create output directory {}: {}", dir_.string(), ec.message()));
}

std::filesystem::path ReportWriter::path_for(std::string_view part, std::string_view ext) const {
  std::string name = fmt::format("{}_{}", subcommand_, stamp_);
  if (!part.empty()) name += fmt::format("_{}", part);
  name += ext;
  return dir_ / name;
}

std::filesystem::path ReportWriter::write_csv(std::string_view part, const Row& header,
                                              const std::vector<Row>& rows) {
  const auto path = path_for(part, ".csv");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, fmt::format("cannot write {}", path.string()));
  for (const auto& [key, value] : snapshot_.items())
    out << "# " << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump())
        << '\n';
  csv::write_row(out, header);
  for (const auto& row : rows) csv::write_row(out, row);
  written_.push_back(path);
  return path;
}

std::filesystem::path ReportWriter::write_json(std::string_view part, Json body) {
  const auto path = path_for(part, ".json");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, fmt::format("cannot write {}", path.string()));
  Json doc;
  doc["config"] = snapshot_;
  for (auto& [key, value] : body.items()) doc[key] = std::move(value);
  out << doc.dump(2) << '\n';
  written_.push_back(path);
  return path;
}

}  // namespace pvstat::cli
