#pragma once

#include <stdexcept>
#include <string>

namespace slicesim {

enum class ErrorKind {
  infeasible,
  capacity_exceeded,
  unknown_id,
  infeasible_path,
  dimension_mismatch,
  parse,
  config,
  missing_checkpoint,
  non_finite_gradient,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace slicesim
