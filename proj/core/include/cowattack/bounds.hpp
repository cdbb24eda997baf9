#pragma once

#include <iosfwd>

#include "cowattack/types.hpp"

namespace cowattack {

// Expected data-line gain over a lossy fiber of the given length:
// G = 1 - (1 - p_d) [ (1-f) e^{-mu tB etaD eta_ch} + f e^{-2 mu tB etaD eta_ch} ].
double expected_gain(const ChannelParams& channel, const ProtocolParams& params,
                     double distance_km);

// Idealized expected gain at overall transmittance eta (no dark counts,
// t_B ~ 1): G = 1 - [ (1-f) e^{-eta mu} + f e^{-2 eta mu} ].
double expected_gain_ideal(double eta, const ProtocolParams& params);

// Distance at which the expected gain falls to the zero-error gain; beyond it
// no secret key is possible. Bisection to |dG| <= 1e-14. Throws
// NumericalError when no finite solution exists, i.e. when the zero-error
// gain does not lie strictly between the dark-count floor and the gain at
// zero distance.
double l_zero(const ChannelParams& channel, const ProtocolParams& params);

// Largest signal intensity whose zero-error gain stays strictly below the
// idealized expected gain at transmittance eta: the crossing is bracketed by
// doubling and bisected to 1e-12 relative. Throws NumericalError when no
// bracket can be established.
double mu_max(double eta, double f, int m_max);

// Key-rate upper bound (1 - f) eta mu_max(eta, f).
double r_upp(double eta, double f, int m_max);

// CSV sweep emitters over log-spaced eta in [eta_lo, eta_hi]; headers
// "eta,mu_max" and "eta,r_upp,eta_squared" (the last column for plot overlay).
void write_mu_max_sweep(std::ostream& os, double eta_lo, double eta_hi,
                        int points, double f, int m_max);
void write_r_upp_sweep(std::ostream& os, double eta_lo, double eta_hi,
                       int points, double f, int m_max);

}  // namespace cowattack
