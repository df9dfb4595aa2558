#pragma once

// The one place where configuration units become SI base units. Sizes are
// whole bits; work is measured in cycles; time in slots of `slot_duration`.

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace ecc::units {

inline constexpr double kMega = 1e6;
inline constexpr double kGiga = 1e9;

inline std::int64_t bits(double size_mbits) {
  return static_cast<std::int64_t>(std::llround(size_mbits * kMega));
}

/// Gigacycles per Mbit to cycles per bit.
inline double cycles_per_bit(double density_gc_per_mbit) {
  return density_gc_per_mbit * kGiga / kMega;
}

inline double cycles(std::int64_t size_bits, double cycles_per_bit) {
  return static_cast<double>(size_bits) * cycles_per_bit;
}

inline double hertz(double ghz) { return ghz * kGiga; }
inline double bits_per_second(double mbps) { return mbps * kMega; }

/// Ceiling of a slot ratio. Ratios that are integral up to rounding noise
/// are not pushed to the next slot.
inline int ceil_slots(double ratio) {
  const double r = std::round(ratio);
  if (std::abs(ratio - r) <= 1e-9 * std::max(1.0, std::abs(ratio))) return static_cast<int>(r);
  return static_cast<int>(std::ceil(ratio));
}

/// Slots to run `cycles` on a dedicated CPU of `hz` with slot length `slot_s`.
inline int exec_slots(double work_cycles, double hz, double slot_s) {
  return ceil_slots(work_cycles / (hz * slot_s));
}

/// Slots to push `size_bits` through a link of `bps`.
inline int transfer_slots(std::int64_t size_bits, double bps, double slot_s) {
  return ceil_slots(static_cast<double>(size_bits) / (bps * slot_s));
}

/// Whole bits a public stack may process in one slot when `hz` is shared
/// equally among `active` stacks.
inline std::int64_t bits_per_slot(double hz, double slot_s, double cycles_per_bit, int active) {
  const double share = hz * slot_s / (cycles_per_bit * static_cast<double>(active));
  const double r = std::round(share);
  if (std::abs(share - r) <= 1e-9 * std::max(1.0, share)) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::floor(share));
}

}  // namespace ecc::units
