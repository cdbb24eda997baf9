#pragma once

#include <stdexcept>

namespace cowattack {

// Bracketing or convergence failure in one of the numerical solvers, as
// opposed to an invalid argument.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Source-side parameters of the protocol plus Eve's truncation depth.
struct ProtocolParams {
  double mu = 0.0;   // mean photon number per coherent pulse, |alpha|^2
  double f = 0.155;  // decoy emission probability, strictly inside (0, 1)
  int m_max = 10;    // attack truncation depth, >= 2

  // f / (2 (1 - f)); enters the regime conditions of the optimal measurement.
  double gamma() const { return f / (2.0 * (1.0 - f)); }
};

void validate(const ProtocolParams& p);

// Receiver and fiber parameters of Bob's data line.
struct ChannelParams {
  double p_dark = 0.0;     // dark-count probability per detection gate
  double eta_det = 1.0;    // detector efficiency
  double t_bob = 1.0;      // transmittance of Bob's beamsplitter
  double att_db_km = 0.2;  // fiber attenuation coefficient, dB/km

  // 10^(-att_db_km * L / 10)
  double channel_transmittance(double distance_km) const;
};

void validate(const ChannelParams& c);

}  // namespace cowattack
