#pragma once

#include <array>

#include "cowattack/types.hpp"

namespace cowattack {

// Branch of the optimal unambiguous-discrimination solution. With
// g = sqrt(gamma) and h = exp(-mu/2):
//   R1  g <= h                          q_ss = 1 - e^{-mu},      q_ds = 0
//   R2  g > h and cosh(mu/2) >= g       both probabilities nonzero
//   R3  g > h and cosh(mu/2) < g        q_ss = 0,  q_ds = tanh(mu/2)
enum class Regime { R1, R2, R3 };

const char* to_string(Regime r);

// Optimal unambiguous discrimination of the three source states.
//
// q_ss is the probability of a conclusive result for either bit state and
// q_ds the one for the decoy state; inconclusive probabilities are their
// complements. p_cond holds p(j|conclusive) for j = 0, 1, 2, with the
// degenerate p_c = 0 case fixed at (1/2, 1/2, 0).
struct UsdSolution {
  Regime regime = Regime::R1;
  double q_ss = 0.0;
  double q_ds = 0.0;
  double p_c = 0.0;  // (1 - f) q_ss + f q_ds
  std::array<double, 3> p_cond{0.5, 0.5, 0.0};

  double p1c() const { return p_cond[1]; }
};

using Mat3 = std::array<std::array<double, 3>, 3>;

// Gram matrix of the source states at intensity mu: unit diagonal,
// <phi0|phi1> = e^{-mu}, <phi0|phi2> = <phi1|phi2> = e^{-mu/2}.
Mat3 gram_matrix(double mu);

// True iff the success probabilities in `gammas` admit an unambiguous
// measurement, i.e. gram_matrix(mu) - diag(gammas) is positive semidefinite.
// Decided through the three leading principal minors with tolerance 1e-12;
// at 3x3 that is all the machinery needed.
bool usd_feasible(double mu, const std::array<double, 3>& gammas);

// Conclusive-probability-maximizing solution for the given source parameters.
// The reduced two-state construction behind regime R3 is not exposed; its
// closed form tanh(mu/2) together with usd_feasible covers it.
UsdSolution optimal_usd(const ProtocolParams& params);

}  // namespace cowattack
