#include "cowattack/usd.hpp"

#include <cmath>
#include <stdexcept>

namespace cowattack {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::R1: return "R1";
    case Regime::R2: return "R2";
    case Regime::R3: return "R3";
  }
  return "?";
}

Mat3 gram_matrix(double mu) {
  if (!std::isfinite(mu) || mu < 0.0)
    throw std::invalid_argument("mu must be finite and >= 0");
  const double bit_bit = std::exp(-mu);
  const double bit_decoy = std::exp(-mu / 2.0);
  return Mat3{{{1.0, bit_bit, bit_decoy},
               {bit_bit, 1.0, bit_decoy},
               {bit_decoy, bit_decoy, 1.0}}};
}

bool usd_feasible(double mu, const std::array<double, 3>& gammas) {
  constexpr double kTol = 1e-12;
  for (double g : gammas)
    if (!(g >= 0.0 && g <= 1.0))
      throw std::invalid_argument("conclusive probabilities must lie in [0, 1]");
  const Mat3 gram = gram_matrix(mu);
  const double a = 1.0 - gammas[0];
  const double b = 1.0 - gammas[1];
  const double c = 1.0 - gammas[2];
  const double s = gram[0][1];  // e^{-mu}
  const double t = gram[0][2];  // e^{-mu/2}
  const double minor1 = a;
  const double minor2 = a * b - s * s;
  const double minor3 =
      a * (b * c - t * t) - s * (s * c - t * t) + t * (s * t - b * t);
  return minor1 >= -kTol && minor2 >= -kTol && minor3 >= -kTol;
}

UsdSolution optimal_usd(const ProtocolParams& params) {
  validate(params);
  const double mu = params.mu;
  const double f = params.f;
  const double root_gamma = std::sqrt(params.gamma());
  const double half_overlap = std::exp(-mu / 2.0);  // e^{-mu/2}

  UsdSolution sol;
  // Boundary ties resolve to the first branch listed; the solution is
  // continuous there, so the choice is numerically immaterial.
  if (root_gamma <= half_overlap) {
    sol.regime = Regime::R1;
    sol.q_ss = -std::expm1(-mu);
    sol.q_ds = 0.0;
  } else if (std::cosh(mu / 2.0) >= root_gamma) {
    sol.regime = Regime::R2;
    sol.q_ss = 1.0 + std::exp(-mu) - half_overlap * std::sqrt(2.0 * f / (1.0 - f));
    sol.q_ds = 1.0 - half_overlap / root_gamma;
  } else {
    sol.regime = Regime::R3;
    sol.q_ss = 0.0;
    sol.q_ds = std::tanh(mu / 2.0);
  }

  sol.p_c = (1.0 - f) * sol.q_ss + f * sol.q_ds;
  if (sol.p_c > 0.0) {
    const double bit_share = (1.0 - f) * sol.q_ss / (2.0 * sol.p_c);
    sol.p_cond = {bit_share, bit_share, f * sol.q_ds / sol.p_c};
  } else {
    sol.p_cond = {0.5, 0.5, 0.0};
  }
  return sol;
}

}  // namespace cowattack
