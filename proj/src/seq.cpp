#include "sdmri/seq.hpp"

#include <cmath>

namespace sdmri::seq {

Pgse::Pgse(double delta, double Delta, std::string id_)
    : id(std::move(id_)), delta_ms(delta), Delta_ms(Delta) {
  if (!(delta > 0) || !(Delta >= delta))
    throw InputError("PGSE requires 0 < delta <= Delta (got delta=" + format_g17(delta) +
                     ", Delta=" + format_g17(Delta) + ")");
}

double Pgse::profile(double t) const {
  if (t < 0 || t > te()) return 0;
  if (t <= delta_ms) return 1;
  if (t <= Delta_ms) return 0;
  return -1;
}

double Pgse::profile_integral(double t) const {
  if (t <= 0) return 0;
  if (t <= delta_ms) return t;
  if (t <= Delta_ms) return delta_ms;
  if (t <= te()) return delta_ms - (t - Delta_ms);
  return 0;
}

double Pgse::f_square_integral() const {
  return delta_ms * delta_ms * (Delta_ms - delta_ms / 3.0);
}

Gradient::Gradient(const Vec3& u, double amp) : direction(u), amplitude(amp) {
  const double n = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  if (std::abs(n - 1.0) > 1e-12)
    throw InputError("gradient direction must be unit (|u| = " + format_g17(n) + ")");
  if (amp < 0) throw InputError("gradient amplitude must be >= 0");
}

double bvalue(const Pgse& s, double amplitude_T_m) {
  const double g2 = kGammaInternal * kGammaInternal * amplitude_T_m * amplitude_T_m;
  return g2 * s.f_square_integral() * kBInternalToSmm2;
}

double amplitude_for_b(const Pgse& s, double b_s_mm2) {
  if (b_s_mm2 < 0) throw InputError("b-value must be >= 0");
  const double denom = kGammaInternal * kGammaInternal * s.f_square_integral();
  return std::sqrt(b_s_mm2 / kBInternalToSmm2 / denom);
}

std::vector<Vec3> directions(int n, bool hemisphere) {
  if (n < 1) throw InputError("direction count must be >= 1");
  std::vector<Vec3> out(static_cast<std::size_t>(n));
  const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    Vec3 v = {r * std::cos(phi), r * std::sin(phi), z};
    if (hemisphere && v[2] < 0) v = {-v[0], -v[1], -v[2]};
    // Renormalize so |v| = 1 to full precision.
    const double nn = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    out[static_cast<std::size_t>(i)] = {v[0] / nn, v[1] / nn, v[2] / nn};
  }
  return out;
}

}  // namespace sdmri::seq
