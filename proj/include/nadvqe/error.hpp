#pragma once

#include <stdexcept>
#include <string>

namespace nadvqe {

enum class ErrorKind {
  parse,
  range,
  format,
  arity,
  dimension,
  capacity,
  misuse,
  alignment,
  extrapolation,
  empty_field,
  io,
  schema,
  degenerate_gap,
  instability,
  numeric,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::parse: return "parse error";
    case ErrorKind::range: return "range error";
    case ErrorKind::format: return "format error";
    case ErrorKind::arity: return "arity error";
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::capacity: return "capacity error";
    case ErrorKind::misuse: return "misuse error";
    case ErrorKind::alignment: return "alignment error";
    case ErrorKind::extrapolation: return "extrapolation error";
    case ErrorKind::empty_field: return "empty-field error";
    case ErrorKind::io: return "io error";
    case ErrorKind::schema: return "schema error";
    case ErrorKind::degenerate_gap: return "degenerate-gap error";
    case ErrorKind::instability: return "instability error";
    case ErrorKind::numeric: return "numeric error";
  }
  return "error";
}

/// Every library failure is an Error; kind() separates bad input from
/// numerical breakdown (CLI exit codes 1 and 2).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  bool is_numeric() const noexcept {
    return kind_ == ErrorKind::degenerate_gap || kind_ == ErrorKind::instability ||
           kind_ == ErrorKind::numeric;
  }

 private:
  ErrorKind kind_;
};

}  // namespace nadvqe
