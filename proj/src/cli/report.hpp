#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace pvstat::cli {

using Json = nlohmann::ordered_json;
using Row = std::vector<std::string>;

std::string num(double v);
std::string num(const std::optional<double>& v);
Json json_num(const std::optional<double>& v);

// Writes `<subcommand>_<stamp>[_<part>].<ext>` files into one directory.
// Every file embeds the config snapshot: as leading "# " comment lines in
// CSV and as a "config" member in JSON.
class ReportWriter {
 public:
  ReportWriter(std::filesystem::path dir, std::string subcommand, std::string stamp,
               Json snapshot);

  std::filesystem::path write_csv(std::string_view part, const Row& header,
                                  const std::vector<Row>& rows);
  std::filesystem::path write_json(std::string_view part, Json body);

  const std::vector<std::filesystem::path>& written() const { return written_; }

 private:
  std::filesystem::path path_for(std::string_view part, std::string_view ext) const;

  std::filesystem::path dir_;
  std::string subcommand_;
  std::string stamp_;
  Json snapshot_;
  std::vector<std::filesystem::path> written_;
};

}  // namespace pvstat::cli
