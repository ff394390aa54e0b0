#include "rpmac/calibration.hpp"

#include <string>

#include "rpmac/error.hpp"

namespace rpmac {

DelayProfile solve_calibration(const CalibrationMeasurement& m) {
  DelayProfile p;
  p.tx_delay = m.cco_first - m.cco_second;
  const Micros twice_tau = 2 * m.cco_second - m.cco_first;
  if (twice_tau % 2 != 0) {
    throw Error(Errc::inconsistent_measurement, "correction factor is not a whole microsecond");
  }
  p.tau = twice_tau / 2;
  p.transport_delay = m.sta - p.tx_delay;
  p.rx_delay = m.cco_second - p.tau - p.transport_delay;
  if (p.tx_delay < 0 || p.tau < 0 || p.transport_delay < 0 || p.rx_delay < 0) {
    throw Error(Errc::inconsistent_measurement,
                "T_P=" + std::to_string(p.tx_delay) + " R_P=" + std::to_string(p.rx_delay) +
                    " R_M=" + std::to_string(p.transport_delay) + " tau=" + std::to_string(p.tau));
  }
  return p;
}

CalibrationResiduals calibration_residuals(const DelayProfile& p, const CalibrationMeasurement& m) {
  const Micros rx = p.rx_delay + p.transport_delay;
  return {rx - p.tx_delay - p.tau,
          rx + p.tau - m.cco_second,
          rx + p.tx_delay + p.tau - m.cco_first,
          p.transport_delay + p.tx_delay - m.sta};
}

Micros correct_time_difference(Micros cco_difference, Micros tau) {
  const Micros corrected = cco_difference - 2 * tau;
  if (corrected < 0) {
    throw Error(Errc::negative_result, std::to_string(cco_difference) + " - 2*" + std::to_string(tau));
  }
  return corrected;
}

std::uint8_t slot_index(Micros difference, Micros slot_len) {
  if (slot_len <= 0) throw Error(Errc::invalid_config, "slot length must be positive");
  if (difference < 0) throw Error(Errc::negative_result, "negative time difference");
  const Micros index = difference / slot_len;
  if (index >= 256) throw Error(Errc::index_overflow, "slot index " + std::to_string(index));
  return static_cast<std::uint8_t>(index);
}

}  // namespace rpmac
