#include "pvstat/error.hpp"

namespace pvstat {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_geometry: return "invalid geometry";
    case Errc::region_too_thin: return "region too thin";
    case Errc::insufficient_data: return "insufficient data";
    case Errc::domain_error: return "domain error";
    case Errc::schema_error: return "schema error";
    case Errc::row_error: return "row error";
    case Errc::config_error: return "configuration error";
    case Errc::infeasible: return "infeasible";
    case Errc::parameter_error: return "parameter error";
    case Errc::consistency_error: return "consistency error";
    case Errc::io_error: return "i/o error";
  }
  return "unknown error";
}

}  // namespace pvstat
