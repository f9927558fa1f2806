#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pvstat {

enum class Errc {
  invalid_geometry,
  region_too_thin,
  insufficient_data,
  domain_error,
  schema_error,
  row_error,
  config_error,
  infeasible,
  parameter_error,
  consistency_error,
  io_error,
};

std::string_view to_string(Errc code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace pvstat
