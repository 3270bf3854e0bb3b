#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace wsnsched {

using Time = std::int64_t;

// Dense identifiers; each entity's id equals its index in the owning list.
using PointId = std::int32_t;
using SensorId = std::int32_t;
using BaseId = std::int32_t;
using LinkId = std::int32_t;
using AppId = std::int32_t;

inline constexpr std::int32_t kNone = -1;

/// Sensing/transmission/processing rate in fixed point (1/1000 of a rate
/// unit). Ledger sums are integer so incremental and recomputed loads agree
/// bit for bit.
class Rate {
 public:
  static constexpr std::int64_t kScale = 1000;

  constexpr Rate() = default;

  static constexpr Rate from_milli(std::int64_t milli) { return Rate(milli); }
  static Rate from_units(double units) {
    return Rate(static_cast<std::int64_t>(std::llround(units * kScale)));
  }

  [[nodiscard]] constexpr std::int64_t milli() const { return milli_; }
  [[nodiscard]] constexpr double units() const {
    return static_cast<double>(milli_) / kScale;
  }

  constexpr Rate& operator+=(Rate o) {
    milli_ += o.milli_;
    return *this;
  }
  constexpr Rate& operator-=(Rate o) {
    milli_ -= o.milli_;
    return *this;
  }
  friend constexpr Rate operator+(Rate a, Rate b) { return a += b; }
  friend constexpr Rate operator-(Rate a, Rate b) { return a -= b; }
  friend constexpr auto operator<=>(Rate, Rate) = default;

 private:
  constexpr explicit Rate(std::int64_t milli) : milli_(milli) {}
  std::int64_t milli_ = 0;
};

/// coefficient * load <= capacity, evaluated on the fixed-point values.
inline bool fits(double coefficient, Rate load, Rate capacity) {
  return coefficient * static_cast<double>(load.milli()) <=
         static_cast<double>(capacity.milli());
}

/// capacity - coefficient * load, in milli units.
inline double headroom(double coefficient, Rate load, Rate capacity) {
  return static_cast<double>(capacity.milli()) -
         coefficient * static_cast<double>(load.milli());
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input cannot be generated (e.g. not enough distinct grid cells).
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// An assignment references a sensor that does not cover the point, a base
/// the sensor cannot reach, or moves a point that is already being sensed.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Admitting an infeasible application or releasing an inactive one.
class AdmissionError : public Error {
 public:
  using Error::Error;
};

/// Exact solver asked to handle an instance beyond its size guard.
class GuardError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

using Rng = std::mt19937_64;

/// Independent stream per (seed, purpose) so that e.g. the workload stream
/// does not shift when topology generation consumes a different number of
/// draws.
inline Rng make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), stream};
  return Rng(seq);
}

enum class SharingMode { Shared, Unshared };

inline const char* to_string(SharingMode m) {
  return m == SharingMode::Shared ? "shared" : "unshared";
}

}  // namespace wsnsched
