#include "cowattack/types.hpp"

#include <cmath>

namespace cowattack {

void validate(const ProtocolParams& p) {
  if (!std::isfinite(p.mu) || p.mu < 0.0)
    throw std::invalid_argument("mu must be finite and >= 0");
  if (!(p.f > 0.0) || !(p.f < 1.0))
    throw std::invalid_argument("f must lie strictly inside (0, 1)");
  if (p.m_max < 2) throw std::invalid_argument("m_max must be >= 2");
}

void validate(const ChannelParams& c) {
  if (!(c.p_dark >= 0.0 && c.p_dark <= 1.0))
    throw std::invalid_argument("p_dark must lie in [0, 1]");
  if (!(c.eta_det >= 0.0 && c.eta_det <= 1.0))
    throw std::invalid_argument("eta_det must lie in [0, 1]");
  if (!(c.t_bob >= 0.0 && c.t_bob <= 1.0))
    throw std::invalid_argument("t_bob must lie in [0, 1]");
  if (!(c.att_db_km > 0.0) || !std::isfinite(c.att_db_km))
    throw std::invalid_argument("att_db_km must be finite and > 0");
}

double ChannelParams::channel_transmittance(double distance_km) const {
  return std::pow(10.0, -att_db_km * distance_km / 10.0);
}

}  // namespace cowattack
