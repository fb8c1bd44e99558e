#pragma once

// Analytic security pipeline: base error rate with loss, Eve's error-rate
// bound inferred from Bob's (cautious) error rate, parity-pair
// reconciliation accounting, privacy-amplification block sizing and the
// resulting key efficiency. Also generates the Bob-vs-Eve error curves.

#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cvqkd/attacks.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/gaussian_optics.hpp"
#include "cvqkd/infotheory.hpp"

namespace cvqkd::keyrate {

using info::ErrorProbability;
using info::MutualInformation;

enum class SchemeKind { coherent, squeezed };

struct Scheme {
  SchemeKind kind = SchemeKind::coherent;
  double vn = 1.0;  // sub-QNL noise floor, squeezed scheme only

  static Scheme coherent() { return {SchemeKind::coherent, 1.0}; }
  static Scheme squeezed(double vn) {
    detail::require(vn > 0.0 && vn <= 1.0,
                    "squeezed scheme: vn must lie in (0, 1]");
    return {SchemeKind::squeezed, vn};
  }
  bool is_squeezed() const { return kind == SchemeKind::squeezed; }
};

// How line loss degrades Bob's recombined measurement in the squeezed
// scheme.
enum class SqueezedLossModel {
  // Loss L adds L (QNL units) to the input-referred sub-QNL floor:
  // T_B = vn / (vn + L).
  linearized,
  // Full beamsplitter map of gaussian_optics on the squeezed floor:
  // T_B = vn / (vn + L / (1 - L)).
  exact_tap,
};

inline constexpr double kDisclosureFactor = 0.5;
inline constexpr double kSiftFactor = 0.5;

struct ProtocolConfig {
  Scheme scheme = Scheme::coherent();
  double snr_in = 0.0;        // linear, on the lossless line
  double loss = 0.0;          // [0, 1)
  double cutoff_ber = 0.0;    // reject the run above this test error rate
  double assumed_ber = 0.0;   // cautious error rate fed to the bound
  double target_eve_mi = 1e-3;
  SqueezedLossModel squeezed_loss = SqueezedLossModel::linearized;
};

struct KeyRateReport {
  double sift_factor = kSiftFactor;
  double disclosure_factor = kDisclosureFactor;
  double recon_factor = 0.0;
  ErrorProbability eve_ber_bound{0.5};
  ErrorProbability eve_ber_post_recon{0.5};
  std::int64_t pa_block_n = 1;
  double efficiency = 0.0;
  MutualInformation eve_mi_final{0.0};
};

// SNR at which the lossless line gives `base_ber` (the "13 dB" / "10 dB"
// labels are calibrated this way).
inline double calibrated_snr(double base_ber) {
  return info::snr_for_ber(ErrorProbability(base_ber));
}

// Transfer of a lossy line as seen by Bob.
inline double line_transfer(const Scheme& scheme, double loss,
                            SqueezedLossModel model) {
  detail::require(loss >= 0.0 && loss < 1.0,
                  "line_transfer: loss must lie in [0, 1)");
  if (!scheme.is_squeezed() || model == SqueezedLossModel::exact_tap) {
    const optics::QuadratureChannelState in{scheme.vn, scheme.vn, 1.0, 1.0};
    const auto out = optics::apply_loss(in, loss);
    return optics::snr(out, optics::Quadrature::amplitude) /
           optics::snr(in, optics::Quadrature::amplitude);
  }
  return scheme.vn / (scheme.vn + loss);
}

inline ErrorProbability base_ber(const ProtocolConfig& config) {
  detail::require(config.snr_in > 0.0, "base_ber: snr_in must be positive");
  const double t =
      line_transfer(config.scheme, config.loss, config.squeezed_loss);
  return info::ber_from_snr(t * config.snr_in);
}

inline void validate(const ProtocolConfig& c) {
  detail::require(c.snr_in > 0.0, "config: snr_in must be positive");
  detail::require(c.loss >= 0.0 && c.loss < 1.0,
                  "config: loss must lie in [0, 1)");
  detail::require(c.target_eve_mi > 0.0 && c.target_eve_mi < 1.0,
                  "config: target_eve_mi must lie in (0, 1)");
  detail::require(c.cutoff_ber > 0.0 && c.cutoff_ber < 0.5 &&
                      c.assumed_ber > 0.0 && c.assumed_ber < 0.5,
                  "config: error thresholds must lie in (0, 0.5)");
  detail::require(c.assumed_ber >= c.cutoff_ber,
                  "config: assumed_ber must be at least cutoff_ber");
  const double base = base_ber(c).value();
  if (c.cutoff_ber < base) {
    std::ostringstream os;
    os << "config: cutoff_ber " << c.cutoff_ber
       << " is below the base error rate " << base
       << " at the configured loss";
    throw DomainError(os.str());
  }
}

namespace detail_kr {

inline double bob_transfer_at(double snr_in, ErrorProbability bob_threshold,
                              const char* who) {
  detail::require(snr_in > 0.0, std::string(who) + ": snr_in must be positive");
  const double t_b = info::snr_for_ber(bob_threshold) / snr_in;
  if (t_b > 1.0 + 1e-12) {
    std::ostringstream os;
    os << who << ": threshold " << bob_threshold.value()
       << " is below the no-attack error rate "
       << info::ber_from_snr(snr_in).value();
    throw DomainError(os.str());
  }
  return std::min(t_b, 1.0);
}

}  // namespace detail_kr

// Coherent scheme: attribute all of Bob's degradation to an optimal Eve on a
// lossless line, T_E = 1 - T_B.
inline ErrorProbability eve_ber_bound(double snr_in,
                                      ErrorProbability bob_threshold) {
  const double t_b =
      detail_kr::bob_transfer_at(snr_in, bob_threshold, "eve_ber_bound");
  return info::ber_from_snr((1.0 - t_b) * snr_in);
}

// Squeezed scheme analogue, Eve's transfer from the squeezed Bob/Eve
// relation. snr_in is referred to the sub-QNL floor.
inline ErrorProbability squeezed_eve_ber_bound(double vn, double snr_in,
                                               ErrorProbability bob_threshold) {
  const double t_b = detail_kr::bob_transfer_at(snr_in, bob_threshold,
                                                "squeezed_eve_ber_bound");
  const double t_e = attacks::squeezed_max_eve_given_bob(vn, t_b);
  return info::ber_from_snr(t_e * snr_in);
}

inline ErrorProbability eve_ber_bound(const Scheme& scheme, double snr_in,
                                      ErrorProbability bob_threshold) {
  return scheme.is_squeezed()
             ? squeezed_eve_ber_bound(scheme.vn, snr_in, bob_threshold)
             : eve_ber_bound(snr_in, bob_threshold);
}

struct ReconciliationAccounting {
  double recon_factor;
  ErrorProbability eve_ber_post;
};

// Pair-parity reconciliation: the string shrinks by ~(1 - 2 B_B); in the
// worst case Eve sheds as many errors as Bob.
inline ReconciliationAccounting reconcile_accounting(
    ErrorProbability eve_ber, ErrorProbability bob_threshold) {
  if (!(eve_ber.value() > bob_threshold.value())) {
    std::ostringstream os;
    os << "insecure: Maurer condition violated (Eve error "
       << eve_ber.value() << " <= Bob error " << bob_threshold.value()
       << ", so H(A:B) <= H(A:E))";
    throw InsecureError(os.str());
  }
  return {1.0 - 2.0 * bob_threshold.value(),
          ErrorProbability(eve_ber.value() - bob_threshold.value())};
}

inline KeyRateReport key_efficiency(const ProtocolConfig& config) {
  validate(config);
  const ErrorProbability assumed(config.assumed_ber);
  KeyRateReport r;
  r.eve_ber_bound = eve_ber_bound(config.scheme, config.snr_in, assumed);
  const auto recon = reconcile_accounting(r.eve_ber_bound, assumed);
  r.recon_factor = recon.recon_factor;
  r.eve_ber_post_recon = recon.eve_ber_post;
  r.pa_block_n =
      info::min_block_length(r.eve_ber_post_recon, config.target_eve_mi);
  r.eve_mi_final = info::eve_mi_after_pa(r.eve_ber_post_recon, r.pa_block_n);
  r.efficiency = r.disclosure_factor * r.recon_factor /
                 static_cast<double>(r.pa_block_n);
  return r;
}

// ---------------------------------------------------------------------------
// Curves

struct CurvePoint {
  double t_eve;
  double t_bob;
  double eve_ber;
  double bob_ber;
};

inline double max_eve_transfer(const Scheme& scheme) {
  return scheme.is_squeezed() ? attacks::squeezed_eve_bound(scheme.vn) : 0.5;
}

// `points` Eve transfers evenly spaced over (0, max], excluding 0.
inline std::vector<double> eve_transfer_grid(const Scheme& scheme,
                                             std::size_t points) {
  detail::require(points >= 1, "eve_transfer_grid: need at least one point");
  const double hi = max_eve_transfer(scheme);
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = hi * static_cast<double>(i + 1) / static_cast<double>(points);
  }
  return grid;
}

inline double max_bob_transfer(const Scheme& scheme, double t_e) {
  if (scheme.is_squeezed()) return attacks::squeezed_bounds(scheme.vn, t_e);
  detail::require(t_e >= 0.0 && t_e <= 0.5,
                  "coherent curve: Eve transfer must lie in [0, 0.5]");
  return 1.0 - t_e;
}

// Minimum Bob error against Eve's error, one point per Eve transfer.
inline std::vector<CurvePoint> curve_bob_vs_eve(const Scheme& scheme,
                                                double snr_in,
                                                std::span<const double> grid) {
  detail::require(snr_in > 0.0, "curve_bob_vs_eve: snr_in must be positive");
  std::vector<CurvePoint> out;
  out.reserve(grid.size());
  for (double t_e : grid) {
    const double t_b = max_bob_transfer(scheme, t_e);
    out.push_back({t_e, t_b, info::ber_from_snr(t_e * snr_in).value(),
                   info::ber_from_snr(t_b * snr_in).value()});
  }
  return out;
}

// Smallest loss at which Bob's transfer over the lossy line equals the
// transfer Eve could hold consistent with it.
inline double squeezed_breakeven_loss(
    double vn, SqueezedLossModel model = SqueezedLossModel::linearized) {
  detail::require(vn > 0.0 && vn <= 1.0,
                  "squeezed_breakeven_loss: vn must lie in (0, 1]");
  const Scheme scheme = Scheme::squeezed(vn);
  auto gap = [&](double loss) {
    const double t_b = line_transfer(scheme, loss, model);
    return attacks::squeezed_max_eve_given_bob(vn, t_b) - t_b;
  };
  double lo = 0.0;          // gap < 0: Bob ahead
  double hi = 1.0 - 1e-15;  // gap > 0: Eve ahead
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (gap(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace cvqkd::keyrate
