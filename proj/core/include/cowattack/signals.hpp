#pragma once

#include <cstdint>

namespace cowattack {

// Source alphabet. Each signal occupies two consecutive time slots; a slot
// carries either a coherent pulse (occupied) or vacuum. In temporal order:
//   Bit0   (occupied, vacuum)     encodes bit 0
//   Bit1   (vacuum, occupied)     encodes bit 1
//   Decoy  (occupied, occupied)
//   Vacuum (vacuum, vacuum)       only ever sent by Eve
enum class SignalKind : std::uint8_t { Bit0 = 0, Bit1 = 1, Decoy = 2, Vacuum = 3 };

constexpr bool first_pulse_occupied(SignalKind s) {
  return s == SignalKind::Bit0 || s == SignalKind::Decoy;
}

constexpr bool second_pulse_occupied(SignalKind s) {
  return s == SignalKind::Bit1 || s == SignalKind::Decoy;
}

const char* to_string(SignalKind s);

// Result of measuring one signal. A conclusive outcome identifies the signal
// exactly (`kind` echoes it); an inconclusive outcome carries no information
// and leaves `kind` at Vacuum.
struct MeasureOutcome {
  SignalKind kind = SignalKind::Vacuum;
  bool conclusive = false;
};

}  // namespace cowattack
