#pragma once

#include <array>
#include <string>
#include <vector>

#include "sdmri/util.hpp"

namespace sdmri::seq {

using Vec3 = std::array<double, 3>;

/// Gyromagnetic ratio of the water proton, in internal units:
/// rad ms^-1 um^-1 (T/m)^-1. (2.67513e8 rad s^-1 T^-1 in SI.)
constexpr double kGammaInternal = 0.267513;

/// Conversion between internal b (ms/um^2) and reported b (s/mm^2).
constexpr double kBInternalToSmm2 = 1e3;

/// Pulsed-gradient spin echo: two rectangular pulses of duration delta
/// separated by Delta; first pulse starts at t = 0, echo at TE = delta+Delta.
struct Pgse {
  std::string id = "seq";
  double delta_ms = 0;
  double Delta_ms = 0;

  Pgse() = default;
  Pgse(double delta, double Delta, std::string id_ = "seq");

  double te() const { return delta_ms + Delta_ms; }
  /// Effective gradient profile: +1 on [0,delta], 0 on (delta,Delta],
  /// -1 on (Delta,TE].
  double profile(double t) const;
  /// F(t) = int_0^t f(s) ds.
  double profile_integral(double t) const;
  /// int_0^TE F(t)^2 dt = delta^2 (Delta - delta/3).
  double f_square_integral() const;
};

struct Gradient {
  Vec3 direction{1, 0, 0};  // unit vector
  double amplitude = 0;     // T/m

  Gradient() = default;
  Gradient(const Vec3& u, double amp);
  Vec3 g() const {
    return {amplitude * direction[0], amplitude * direction[1], amplitude * direction[2]};
  }
};

/// b-value in s/mm^2 for the PGSE closed form gamma^2 g^2 delta^2 (Delta - delta/3).
double bvalue(const Pgse& s, double amplitude_T_m);

/// Inverse of bvalue: |g| such that bvalue(s, |g|) = b_s_mm2.
double amplitude_for_b(const Pgse& s, double b_s_mm2);

/// Deterministic Fibonacci-sphere direction set. With hemisphere=true, points
/// with z < 0 are mirrored through the origin so all directions have z >= 0.
std::vector<Vec3> directions(int n, bool hemisphere = false);

}  // namespace sdmri::seq
