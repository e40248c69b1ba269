#pragma once

#include <stdexcept>
#include <string>

namespace htlb {

enum class Errc {
  invalid_dimension,
  invalid_parameter,
  numeric_degeneracy,
  empty_input,
  invalid_arm,
  instance_infeasible,
  invalid_instance,
  invalid_horizon,
  invalid_record,
  aggregation,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace htlb
