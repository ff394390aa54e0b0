#pragma once

#include <cstdint>

#include "rpmac/types.hpp"

namespace rpmac {

/// Hardware delays of one platform. Propagation is taken as zero.
struct DelayProfile {
  Micros tx_delay = 0;         // coding and transmitting to the channel
  Micros rx_delay = 0;         // receiving and decoding from the channel
  Micros transport_delay = 0;  // PHY to MAC transfer
  Micros tau = 0;              // correction factor
  bool operator==(const DelayProfile&) const = default;
};

/// Time differences observed during the zero-backoff calibration exchange.
struct CalibrationMeasurement {
  Micros cco_first = 0;   // tauCCO1
  Micros cco_second = 0;  // tauCCO2
  Micros sta = 0;         // tauSTA
};

/// Solves the four-equation delay system. Throws inconsistent-measurement when
/// a delay would be negative or tau is not an integer number of microseconds.
DelayProfile solve_calibration(const CalibrationMeasurement& m);

/// Residuals of the four delay equations for `p` against `m`; all zero for a solution.
struct CalibrationResiduals {
  Micros row1, row2, row3, row4;
};
CalibrationResiduals calibration_residuals(const DelayProfile& p, const CalibrationMeasurement& m);

/// deltaT_CCO - 2*tau. Throws negative-result when that would be negative.
Micros correct_time_difference(Micros cco_difference, Micros tau);

/// floor(difference / slot_len) as a one-byte TDF index. Throws index-overflow.
std::uint8_t slot_index(Micros difference, Micros slot_len);

}  // namespace rpmac
