#include "cowattack/bounds.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "cowattack/analytics.hpp"

namespace cowattack {

double expected_gain(const ChannelParams& channel, const ProtocolParams& params,
                     double distance_km) {
  validate(channel);
  validate(params);
  if (!(distance_km >= 0.0))
    throw std::invalid_argument("distance must be >= 0");
  const double eta_ch = channel.channel_transmittance(distance_km);
  const double exponent = params.mu * channel.t_bob * channel.eta_det * eta_ch;
  return 1.0 - (1.0 - channel.p_dark) *
                   ((1.0 - params.f) * std::exp(-exponent) +
                    params.f * std::exp(-2.0 * exponent));
}

double expected_gain_ideal(double eta, const ProtocolParams& params) {
  validate(params);
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("eta must lie in [0, 1]");
  const double exponent = eta * params.mu;
  return 1.0 - ((1.0 - params.f) * std::exp(-exponent) +
                params.f * std::exp(-2.0 * exponent));
}

double l_zero(const ChannelParams& channel, const ProtocolParams& params) {
  const double target = gain_zero(params);
  const double dark_floor = channel.p_dark;  // gain as L -> infinity
  const double gain_at_zero = expected_gain(channel, params, 0.0);
  if (!(target > dark_floor) || !(target < gain_at_zero))
    throw NumericalError(
        "l_zero: no finite solution; the zero-error gain does not lie between "
        "the dark-count floor and the gain at zero distance");

  double lo = 0.0;
  double hi = 1.0;
  while (expected_gain(channel, params, hi) > target) {
    hi *= 2.0;
    if (hi > 1e9) throw NumericalError("l_zero: failed to bracket the distance");
  }
  // The gain is strictly decreasing in L above the dark-count floor.
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double g = expected_gain(channel, params, mid);
    if (std::abs(g - target) <= 1e-14) return mid;
    (g > target ? lo : hi) = mid;
  }
  const double mid = 0.5 * (lo + hi);
  if (std::abs(expected_gain(channel, params, mid) - target) <= 1e-12) return mid;
  throw NumericalError("l_zero: bisection did not converge in 200 iterations");
}

double mu_max(double eta, double f, int m_max) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("eta must lie in (0, 1]");
  validate(ProtocolParams{0.0, f, m_max});

  // Negative below the crossing intensity, positive above it.
  const auto excess = [&](double mu) {
    const ProtocolParams p{mu, f, m_max};
    return gain_zero(p) - expected_gain_ideal(eta, p);
  };

  double hi = 1e-9;
  while (excess(hi) >= 0.0) {
    hi *= 0.5;
    if (hi < 1e-300)
      throw NumericalError("mu_max: no positive starting point below the crossing");
  }
  double lo = hi;
  while (excess(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e3)
      throw NumericalError(
          "mu_max: the zero-error gain never reaches the expected gain");
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * lo; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return lo;  // largest intensity with the zero-error gain strictly below
}

double r_upp(double eta, double f, int m_max) {
  return (1.0 - f) * eta * mu_max(eta, f, m_max);
}

namespace {

void write_sweep(std::ostream& os, double eta_lo, double eta_hi, int points,
                 double f, int m_max, bool rate) {
  if (points < 2) throw std::invalid_argument("a sweep needs at least 2 points");
  if (!(eta_lo > 0.0) || !(eta_hi > eta_lo))
    throw std::invalid_argument("require 0 < eta_lo < eta_hi");
  os << (rate ? "eta,r_upp,eta_squared\n" : "eta,mu_max\n");
  const double step = std::log10(eta_hi / eta_lo) / (points - 1);
  char line[96];
  for (int i = 0; i < points; ++i) {
    const double eta = eta_lo * std::pow(10.0, step * i);
    if (rate)
      std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g\n", eta,
                    r_upp(eta, f, m_max), eta * eta);
    else
      std::snprintf(line, sizeof line, "%.10g,%.10g\n", eta,
                    mu_max(eta, f, m_max));
    os << line;
  }
}

}  // namespace

void write_mu_max_sweep(std::ostream& os, double eta_lo, double eta_hi,
                        int points, double f, int m_max) {
  write_sweep(os, eta_lo, eta_hi, points, f, m_max, false);
}

void write_r_upp_sweep(std::ostream& os, double eta_lo, double eta_hi,
                       int points, double f, int m_max) {
  write_sweep(os, eta_lo, eta_hi, points, f, m_max, true);
}

}  // namespace cowattack
