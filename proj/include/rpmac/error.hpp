#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rpmac {

enum class Errc {
  oversize_payload,
  oversize_route,
  bad_head,
  checksum_mismatch,
  bad_length,
  unknown_instruction,
  malformed_payload,
  invalid_range,
  pool_exhausted,
  double_release,
  inconsistent_measurement,
  negative_result,
  index_overflow,
  unknown_node,
  invalid_probability,
  invalid_config,
  config_parse,
};

std::string_view errc_name(Errc code) noexcept;

/// Every recoverable failure in the library is reported with one of these.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace rpmac
