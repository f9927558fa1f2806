#include "pvstat/csv.hpp"

#include <fmt/format.h>

#include "pvstat/error.hpp"

namespace pvstat::csv {

std::optional<std::vector<std::string>> Reader::next() {
  int c = in_.get();
  if (first_) {
    first_ = false;
    // UTF-8 byte order mark
    if (c == 0xEF && in_.peek() == 0xBB) {
      in_.get();
      if (in_.peek() == 0xBF) in_.get();
      c = in_.get();
    }
  }
  if (c == EOF) return std::nullopt;

  record_line_ = current_line_;
  std::vector<std::string> fields(1);
  bool quoted = false;
  bool field_started_quoted = false;
  for (;; c = in_.get()) {
    if (c == EOF) {
      if (quoted)
        throw Error(Errc::schema_error,
                    fmt::format("unterminated quoted field starting on line {}", record_line_));
      break;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          fields.back() += '"';
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++current_line_;
        fields.back() += ch;
      }
      continue;
    }
    if (ch == '"' && fields.back().empty() && !field_started_quoted) {
      quoted = true;
      field_started_quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
      field_started_quoted = false;
    } else if (ch == '\r' && in_.peek() == '\n') {
      continue;
    } else if (ch == '\n') {
      ++current_line_;
      break;
    } else {
      fields.back() += ch;
    }
  }
  return fields;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace pvstat::csv
