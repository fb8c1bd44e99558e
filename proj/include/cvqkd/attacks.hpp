#pragma once

// Eavesdropper strategies against the coherent-state and squeezed-state
// (EPR) schemes, expressed through signal-transfer coefficients
// T = SNR_out / SNR_in, and the teleporter that realises the optimum.

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <variant>

#include "cvqkd/errors.hpp"
#include "cvqkd/gaussian_optics.hpp"
#include "cvqkd/infotheory.hpp"

namespace cvqkd::attacks {

using info::ErrorProbability;
using optics::MeasurementPenalties;

inline constexpr double kSumRuleTolerance = 1e-12;

struct TransferPair {
  double plus = 1.0;
  double minus = 1.0;

  TransferPair() = default;
  TransferPair(double p, double m) : plus(p), minus(m) {
    detail::require(p >= 0.0 && p <= 1.0 && m >= 0.0 && m <= 1.0,
                    "transfer coefficients must lie in [0, 1]");
  }
  static TransferPair symmetric(double t) { return {t, t}; }
  double get(optics::Quadrature q) const {
    return q == optics::Quadrature::amplitude ? plus : minus;
  }
};

struct ErrorPair {
  ErrorProbability plus{0.5};
  ErrorProbability minus{0.5};
  double mean() const { return 0.5 * (plus.value() + minus.value()); }
  ErrorProbability get(optics::Quadrature q) const {
    return q == optics::Quadrature::amplitude ? plus : minus;
  }
};

// Intercept one quadrature chosen at random and resend it; guess the other.
struct Guess {};
// Single homodyne at the quadrature angle half-way between the two.
struct MidQuadrature {};
// Tap `fraction` of the beam and detect both quadratures of the tap.
struct Beamsplit {
  double fraction;
};
// Symmetric attack saturating the sum rule, Eve transfer `t_e`.
struct OptimalSymmetric {
  double t_e;
};
// Continuous-variable teleporter with parametric gain `gain` (G) and
// teleporter gain `lambda`.
struct Teleport {
  double gain;
  double lambda;
};

using AttackKind =
    std::variant<Guess, MidQuadrature, Beamsplit, OptimalSymmetric, Teleport>;

class AttackModel {
 public:
  AttackModel(AttackKind kind) : kind_(kind) { validate(); }  // NOLINT

  static AttackModel guess() { return {Guess{}}; }
  static AttackModel mid_quadrature() { return {MidQuadrature{}}; }
  static AttackModel beamsplit(double fraction) { return {Beamsplit{fraction}}; }
  static AttackModel optimal_symmetric(double t_e) {
    return {OptimalSymmetric{t_e}};
  }
  static AttackModel teleport(double gain, double lambda) {
    return {Teleport{gain, lambda}};
  }

  const AttackKind& kind() const { return kind_; }
  std::string name() const;

 private:
  void validate() const;
  AttackKind kind_;
};

struct AttackOutcome {
  TransferPair t_eve;
  TransferPair t_bob;
  ErrorPair eve_by_quadrature;
  ErrorPair bob_by_quadrature;

  // Averaged over Bob's uniformly random quadrature choice.
  ErrorProbability ber_eve() const {
    return ErrorProbability(eve_by_quadrature.mean());
  }
  ErrorProbability ber_bob() const {
    return ErrorProbability(bob_by_quadrature.mean());
  }
};

inline std::string AttackModel::name() const {
  struct Visitor {
    std::string operator()(const Guess&) const { return "guess"; }
    std::string operator()(const MidQuadrature&) const {
      return "mid_quadrature";
    }
    std::string operator()(const Beamsplit&) const { return "beamsplit"; }
    std::string operator()(const OptimalSymmetric&) const {
      return "optimal_symmetric";
    }
    std::string operator()(const Teleport&) const { return "teleport"; }
  };
  return std::visit(Visitor{}, kind_);
}

inline void AttackModel::validate() const {
  if (auto* b = std::get_if<Beamsplit>(&kind_)) {
    detail::require(b->fraction >= 0.0 && b->fraction <= 1.0,
                    "beamsplit: fraction must lie in [0, 1]");
  } else if (auto* o = std::get_if<OptimalSymmetric>(&kind_)) {
    detail::require(o->t_e > 0.0 && o->t_e <= 0.5,
                    "optimal_symmetric: t_e must lie in (0, 0.5]");
  } else if (auto* t = std::get_if<Teleport>(&kind_)) {
    detail::require(t->gain >= 1.0, "teleport: gain G must be >= 1");
    detail::require(t->lambda > 0.0, "teleport: lambda must be > 0");
  }
}

// Bit error after a decision is relayed through a second, independent
// binary symmetric channel.
inline double compose_errors(double a, double b) {
  return a * (1.0 - b) + b * (1.0 - a);
}

inline ErrorProbability ber_at(const TransferPair& t, optics::Quadrature q,
                               double snr_in) {
  return info::ber_from_snr(t.get(q) * snr_in);
}

inline ErrorPair errors_from_transfer(const TransferPair& t, double snr_in) {
  return {info::ber_from_snr(t.plus * snr_in),
          info::ber_from_snr(t.minus * snr_in)};
}

// ---------------------------------------------------------------------------
// Teleporter

// Eve reads the classical channel of a lossless teleporter; penalties
// V_E = 2G - 1 and, for the teleported output with gain lambda,
// V_B = ((lambda sqrt G - sqrt(G-1))^2 + (sqrt G - lambda sqrt(G-1))^2)
//       / lambda^2.
inline MeasurementPenalties teleport_attack(double gain, double lambda) {
  detail::require(gain >= 1.0, "teleport_attack: gain G must be >= 1");
  detail::require(lambda > 0.0, "teleport_attack: lambda must be > 0");
  const double sg = std::sqrt(gain);
  const double sg1 = std::sqrt(gain - 1.0);
  const double v_e = 2.0 * gain - 1.0;
  const double a = lambda * sg - sg1;
  const double b = sg - lambda * sg1;
  const double v_b = (a * a + b * b) / (lambda * lambda);
  return {v_e, v_e, v_b, v_b};
}

// Teleporter gain at which Bob's penalty is the minimum allowed by Eve's.
inline double lambda_opt(double gain) {
  if (!(gain > 1.0)) {
    throw DomainError(
        "lambda_opt: requires G > 1; as G -> 1 the optimal gain diverges "
        "(the optimum is the lambda -> infinity limit)");
  }
  const double sg = std::sqrt(gain);
  const double sg1 = std::sqrt(gain - 1.0);
  const double v_sq = (sg - sg1) * (sg - sg1);
  const double v_sq2 = v_sq * v_sq;
  return (1.0 + v_sq2) / (1.0 - v_sq2);
}

// ---------------------------------------------------------------------------
// Coherent-state scheme

inline AttackOutcome coherent_attack(const AttackModel& model, double snr_in) {
  detail::require(snr_in > 0.0, "coherent_attack: snr_in must be positive");
  const double b0 = info::ber_from_snr(snr_in).value();

  struct Visitor {
    double snr_in;
    double b0;

    AttackOutcome operator()(const Guess&) const {
      // Eve guesses the amplitude quadrature (the phase case is the mirror
      // image): full information there, none on the other.
      const TransferPair t_eve{1.0, 0.0};
      const TransferPair t_bob{1.0, 0.0};
      const ErrorPair eve{ErrorProbability(b0), ErrorProbability(0.5)};
      // Right guess: Eve's decision resent and re-detected. Wrong guess:
      // Bob reads Eve's random filler.
      const ErrorPair bob{ErrorProbability(compose_errors(b0, b0)),
                          ErrorProbability(0.5)};
      return {t_eve, t_bob, eve, bob};
    }

    AttackOutcome operator()(const MidQuadrature&) const {
      // Three-level decision on X(45deg): equal bits are resolved, unequal
      // ones are not. q: noise crosses one decision boundary; q3: crosses
      // into the opposite outer level.
      const double q = info::ber_from_snr(snr_in / 2.0).value();
      const double q3 = info::ber_from_snr(4.5 * snr_in).value();
      const double e = 0.25 + 0.25 * (q + q3);
      const double bob = compose_errors(e, b0);
      const TransferPair half{0.5, 0.5};
      return {half, half, {ErrorProbability(e), ErrorProbability(e)},
              {ErrorProbability(bob), ErrorProbability(bob)}};
    }

    AttackOutcome operator()(const Beamsplit& b) const {
      const auto t_eve = TransferPair::symmetric(0.5 * b.fraction);
      const auto t_bob = TransferPair::symmetric(1.0 - b.fraction);
      return {t_eve, t_bob, errors_from_transfer(t_eve, snr_in),
              errors_from_transfer(t_bob, snr_in)};
    }

    AttackOutcome operator()(const OptimalSymmetric& o) const {
      const auto t_eve = TransferPair::symmetric(o.t_e);
      const auto t_bob = TransferPair::symmetric(1.0 - o.t_e);
      return {t_eve, t_bob, errors_from_transfer(t_eve, snr_in),
              errors_from_transfer(t_bob, snr_in)};
    }

    AttackOutcome operator()(const Teleport& t) const {
      const auto p = teleport_attack(t.gain, t.lambda);
      const TransferPair t_eve{optics::transfer_from_penalty(1.0, p.v_e_plus),
                               optics::transfer_from_penalty(1.0, p.v_e_minus)};
      const TransferPair t_bob{optics::transfer_from_penalty(1.0, p.v_b_plus),
                               optics::transfer_from_penalty(1.0, p.v_b_minus)};
      return {t_eve, t_bob, errors_from_transfer(t_eve, snr_in),
              errors_from_transfer(t_bob, snr_in)};
    }
  };
  return std::visit(Visitor{snr_in, b0}, model.kind());
}

// ---------------------------------------------------------------------------
// Squeezed-state (EPR) scheme

struct NoiseFloors {
  double vn_a;  // sub-QNL amplitude noise of beam a
  double vn_b;  // sub-QNL amplitude noise of beam b
};

struct ExcessNoise {
  double v_anti_a;  // anti-squeezed (phase) noise of beam a
  double v_anti_b;  // anti-squeezed (phase) noise of beam b
};

// Maximum transfer for a receiver of the transmitted EPR beam whose
// measurements carry penalties (plus, minus).
inline TransferPair squeezed_transfer(double penalty_plus,
                                      double penalty_minus,
                                      const NoiseFloors& floors,
                                      const ExcessNoise& excess) {
  detail::require(floors.vn_a > 0.0 && floors.vn_b > 0.0,
                  "squeezed_transfer: noise floors must be positive");
  detail::require(
      excess.v_anti_a * floors.vn_a >= 1.0 - optics::kPhysicalityTolerance &&
          excess.v_anti_b * floors.vn_b >= 1.0 - optics::kPhysicalityTolerance,
      "squeezed_transfer: anti-squeezed noise must satisfy V+ V- >= 1");
  detail::require(penalty_plus >= 0.0 && penalty_minus >= 0.0,
                  "squeezed_transfer: penalties must be non-negative");
  auto eval = [](double v, double floor, double anti) {
    if (std::isinf(v)) return floor / (floor + anti);
    return (v + 2.0 * anti) * floor /
           (2.0 * floor * anti + v * (floor + anti));
  };
  return {eval(penalty_plus, floors.vn_a, excess.v_anti_b),
          eval(penalty_minus, floors.vn_b, excess.v_anti_a)};
}

inline TransferPair squeezed_transfer_eve(const MeasurementPenalties& v_e,
                                          const NoiseFloors& floors,
                                          const ExcessNoise& excess) {
  return squeezed_transfer(v_e.v_e_plus, v_e.v_e_minus, floors, excess);
}

inline TransferPair squeezed_transfer_bob(const MeasurementPenalties& v_b,
                                          const NoiseFloors& floors,
                                          const ExcessNoise& excess) {
  return squeezed_transfer(v_b.v_b_plus, v_b.v_b_minus, floors, excess);
}

// Large anti-squeezing limit: T = vn / (vn + V / 2).
inline double squeezed_transfer_large_excess(double vn, double penalty) {
  detail::require(vn > 0.0 && penalty >= 0.0,
                  "squeezed_transfer_large_excess: need vn > 0, V >= 0");
  if (std::isinf(penalty)) return 0.0;
  return vn / (vn + 0.5 * penalty);
}

// Most Eve can take simultaneously under a symmetric attack:
// T_E <= 2 vn / (2 vn + 1).
inline double squeezed_eve_bound(double vn) {
  detail::require(vn > 0.0, "squeezed_eve_bound: vn must be positive");
  return 2.0 * vn / (2.0 * vn + 1.0);
}

// Bob's maximum transfer given Eve's, from
// T_E T_B / ((1 - T_E)(1 - T_B)) <= 4 vn.
inline double squeezed_bounds(double vn, double t_e) {
  detail::require(vn > 0.0 && vn <= 1.0,
                  "squeezed_bounds: vn must lie in (0, 1]");
  const double bound = squeezed_eve_bound(vn);
  if (!(t_e > 0.0 && t_e <= bound * (1.0 + kSumRuleTolerance))) {
    std::ostringstream os;
    os << "squeezed_bounds: Eve transfer " << t_e
       << " is outside the admissible region (0, " << bound
       << "]; no such attack exists";
    throw DomainError(os.str());
  }
  const double x = 4.0 * vn * (1.0 - t_e) / t_e;
  return x / (1.0 + x);
}

// The same relation solved for Eve: her largest transfer consistent with an
// observed Bob transfer. Not clipped at squeezed_eve_bound, so for
// t_b < 2/3 the result overstates what a symmetric attack can reach.
inline double squeezed_max_eve_given_bob(double vn, double t_b) {
  detail::require(vn > 0.0 && vn <= 1.0,
                  "squeezed_max_eve_given_bob: vn must lie in (0, 1]");
  detail::require(t_b > 0.0 && t_b <= 1.0,
                  "squeezed_max_eve_given_bob: t_b must lie in (0, 1]");
  const double r = 4.0 * vn * (1.0 - t_b) / t_b;
  return r / (1.0 + r);
}

// Attack outcome in the squeezed scheme. SNRs are referred to the sub-QNL
// floor: snr_in = V_s / vn.
inline AttackOutcome squeezed_attack(const AttackModel& model, double vn,
                                     double snr_in) {
  detail::require(snr_in > 0.0, "squeezed_attack: snr_in must be positive");
  detail::require(vn > 0.0 && vn <= 1.0,
                  "squeezed_attack: vn must lie in (0, 1]");
  if (auto* o = std::get_if<OptimalSymmetric>(&model.kind())) {
    const auto t_eve = TransferPair::symmetric(o->t_e);
    const auto t_bob = TransferPair::symmetric(squeezed_bounds(vn, o->t_e));
    return {t_eve, t_bob, errors_from_transfer(t_eve, snr_in),
            errors_from_transfer(t_bob, snr_in)};
  }
  if (auto* t = std::get_if<Teleport>(&model.kind())) {
    const auto p = teleport_attack(t->gain, t->lambda);
    const TransferPair t_eve{squeezed_transfer_large_excess(vn, p.v_e_plus),
                             squeezed_transfer_large_excess(vn, p.v_e_minus)};
    const TransferPair t_bob{squeezed_transfer_large_excess(vn, p.v_b_plus),
                             squeezed_transfer_large_excess(vn, p.v_b_minus)};
    return {t_eve, t_bob, errors_from_transfer(t_eve, snr_in),
            errors_from_transfer(t_bob, snr_in)};
  }
  if (std::holds_alternative<Guess>(model.kind())) {
    // Resent through Eve's own EPR source and classical channel.
    return coherent_attack(model, snr_in);
  }
  throw DomainError("squeezed_attack: " + model.name() +
                    " is not modelled for the squeezed scheme");
}

}  // namespace cvqkd::attacks
