#pragma once

// Variance-level model of quadrature-encoded optical beams.
//
// All variances are spectral densities at a single analysis frequency and
// are normalised to the quantum noise limit (QNL): a coherent beam has
// noise variance 1 on both quadratures.

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "cvqkd/errors.hpp"

namespace cvqkd::optics {

enum class Quadrature { amplitude, phase };

inline constexpr double kPhysicalityTolerance = 1e-12;

struct QuadratureChannelState {
  double vn_plus = 1.0;   // amplitude noise
  double vn_minus = 1.0;  // phase noise
  double vs_plus = 0.0;   // amplitude signal
  double vs_minus = 0.0;  // phase signal

  static QuadratureChannelState coherent(double vs_plus, double vs_minus) {
    return {1.0, 1.0, vs_plus, vs_minus};
  }

  double noise(Quadrature q) const {
    return q == Quadrature::amplitude ? vn_plus : vn_minus;
  }
  double signal(Quadrature q) const {
    return q == Quadrature::amplitude ? vs_plus : vs_minus;
  }

  bool non_negative() const {
    return vn_plus >= 0 && vn_minus >= 0 && vs_plus >= 0 && vs_minus >= 0;
  }
  // Minimum-uncertainty states sit on equality.
  bool physical() const {
    return non_negative() &&
           vn_plus * vn_minus >= 1.0 - kPhysicalityTolerance;
  }
  bool is_coherent() const { return vn_plus == 1.0 && vn_minus == 1.0; }

  friend bool operator==(const QuadratureChannelState&,
                         const QuadratureChannelState&) = default;
};

// Added-noise penalties in QNL units, referred to the measured system.
// Infinity is allowed and means "no information".
struct MeasurementPenalties {
  double v_e_plus = 0.0;
  double v_e_minus = 0.0;
  double v_b_plus = 0.0;
  double v_b_minus = 0.0;
};

enum class UncertaintyConstraint {
  eve_product,             // V_E+ V_E- >= 1
  bob_plus_eve_minus,      // V_B+ V_E- >= 1
  eve_plus_bob_minus,      // V_E+ V_B- >= 1
};

struct UncertaintyCheck {
  bool admissible = true;
  std::vector<UncertaintyConstraint> violated;
};

inline double snr(const QuadratureChannelState& state, Quadrature q) {
  const double vn = state.noise(q);
  if (!(vn > 0.0)) {
    throw DomainError("snr: noise variance must be positive (noiseless "
                      "channel is unphysical)");
  }
  return state.signal(q) / vn;
}

struct TapOutputs {
  QuadratureChannelState tapped;
  QuadratureChannelState transmitted;
};

// Beamsplitter with vacuum on the empty port. `fraction` is the power
// reflectivity towards the tapped output.
inline TapOutputs tap(const QuadratureChannelState& state, double fraction) {
  detail::require(fraction >= 0.0 && fraction <= 1.0,
                  "tap: fraction must lie in [0, 1]");
  const double keep = 1.0 - fraction;
  TapOutputs out;
  out.tapped = {fraction * state.vn_plus + keep,
                fraction * state.vn_minus + keep,
                fraction * state.vs_plus, fraction * state.vs_minus};
  out.transmitted = {keep * state.vn_plus + fraction,
                     keep * state.vn_minus + fraction,
                     keep * state.vs_plus, keep * state.vs_minus};
  return out;
}

// Passive line loss: the transmitted port of a tap whose reflected port is
// assumed to reach the eavesdropper.
inline QuadratureChannelState apply_loss(const QuadratureChannelState& state,
                                         double loss) {
  detail::require(loss >= 0.0 && loss < 1.0,
                  "apply_loss: loss must lie in [0, 1)");
  return tap(state, loss).transmitted;
}

namespace detail_optics {

inline bool product_at_least_one(double a, double b) {
  // 0 * inf is the saturated limit of an infinite/zero penalty pair.
  if ((a == 0.0 && std::isinf(b)) || (b == 0.0 && std::isinf(a))) return true;
  return a * b >= 1.0 - kPhysicalityTolerance;
}

}  // namespace detail_optics

inline UncertaintyCheck check_uncertainty(const MeasurementPenalties& p) {
  UncertaintyCheck result;
  auto check = [&](double a, double b, UncertaintyConstraint id) {
    if (!detail_optics::product_at_least_one(a, b)) result.violated.push_back(id);
  };
  check(p.v_e_plus, p.v_e_minus, UncertaintyConstraint::eve_product);
  check(p.v_b_plus, p.v_e_minus, UncertaintyConstraint::bob_plus_eve_minus);
  check(p.v_e_plus, p.v_b_minus, UncertaintyConstraint::eve_plus_bob_minus);
  result.admissible = result.violated.empty();
  return result;
}

// Signal transfer T = SNR_out / SNR_in for a receiver whose measurement
// carries penalty `penalty` on a floor `vn`; T = vn / (vn + V).
inline double transfer_from_penalty(double vn, double penalty) {
  detail::require(vn > 0.0 && penalty >= 0.0,
                  "transfer_from_penalty: need vn > 0 and penalty >= 0");
  if (std::isinf(penalty)) return 0.0;
  return vn / (vn + penalty);
}

// Inverse of transfer_from_penalty: V = vn (1 - T) / T.
inline double penalty_from_transfer(double vn, double transfer) {
  detail::require(vn > 0.0 && transfer >= 0.0 && transfer <= 1.0,
                  "penalty_from_transfer: need vn > 0 and T in [0, 1]");
  if (transfer == 0.0) return std::numeric_limits<double>::infinity();
  return vn * (1.0 - transfer) / transfer;
}

}  // namespace cvqkd::optics
