#include "sdmri/analysis.hpp"

#include <cmath>
#include <numeric>

#include "sdmri/util.hpp"

namespace sdmri::analysis {

double signal_difference(const DirectionSweep& sweep) {
  if (sweep.test.empty() || sweep.test.size() != sweep.reference.size())
    throw InputError("signal sweeps must be non-empty and matched");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < sweep.test.size(); ++i) {
    num += std::norm(sweep.test[i].signal - sweep.reference[i].signal);
    den += std::norm(sweep.reference[i].signal);
  }
  if (den == 0) throw InputError("signal difference undefined: zero reference energy");
  return num / den;
}

std::vector<double> remove_one_significance(const mf::MFModel& model,
                                            const std::vector<seq::Vec3>& dirs,
                                            const seq::Pgse& s, double b_s_mm2, int threads) {
  const int n = model.neig();
  if (n < 2) throw InputError("remove-one requires at least two modes");
  const double amp = seq::amplitude_for_b(s, b_s_mm2);

  std::vector<mf::SignalRecord> full(dirs.size());
  parallel_for_index(dirs.size(), threads, [&](std::size_t d) {
    full[d] = mf_signal(model, seq::Gradient(dirs[d], amp), s);
  });
  double den = 0;
  for (const auto& r : full) den += std::norm(r.signal);
  if (den == 0) throw InputError("remove-one undefined: zero full-model energy");

  std::vector<double> e_rm(static_cast<std::size_t>(n - 1));
  parallel_for_index(e_rm.size(), threads, [&](std::size_t k) {
    const int removed = static_cast<int>(k) + 1;
    std::vector<int> keep;
    keep.reserve(n - 1);
    for (int i = 0; i < n; ++i)
      if (i != removed) keep.push_back(i);
    const mf::MFModel sub = mf::submodel(model, keep);
    double num = 0;
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      const mf::SignalRecord r = mf_signal(sub, seq::Gradient(dirs[d], amp), s);
      num += std::norm(full[d].signal - r.signal);
    }
    e_rm[k] = num / den;
  });
  return e_rm;
}

bool rgb_direction(const seq::Vec3& a1n, seq::Vec3& rgb) {
  const double n2 = a1n[0] * a1n[0] + a1n[1] * a1n[1] + a1n[2] * a1n[2];
  if (n2 == 0) {
    rgb = {0, 0, 0};
    return false;
  }
  const double n = std::sqrt(n2);
  rgb = {std::abs(a1n[0]) / n, std::abs(a1n[1]) / n, std::abs(a1n[2]) / n};
  return true;
}

double c_delta_Delta(double delta_ms, double Delta_ms) {
  if (!(delta_ms > 0) || !(Delta_ms >= delta_ms))
    throw InputError("C_{delta,Delta} requires 0 < delta <= Delta");
  const double d = delta_ms, D = Delta_ms;
  const double num = std::pow(D + d, 3.5) + std::pow(D - d, 3.5) -
                     2.0 * (std::pow(d, 3.5) + std::pow(D, 3.5));
  return (4.0 / 35.0) * num / (d * d * (D - d / 3.0));
}

double sta_adc(const mesh::Mesh& m, double D0, const seq::Pgse& s, const seq::Vec3& u_g) {
  const double a_ug = mesh::directional_area(m, u_g);
  const double v = mesh::volume(m);
  const double c = c_delta_Delta(s.delta_ms, s.Delta_ms);
  return D0 * (1.0 - 4.0 * std::sqrt(D0) / (3.0 * std::sqrt(M_PI)) * c * a_ug / v);
}

double adc_from_signals(double s0, double sb, double b_s_mm2) {
  if (!(s0 > 0) || !(sb > 0)) throw InputError("ADC requires positive signal magnitudes");
  if (!(b_s_mm2 > 0)) throw InputError("ADC requires positive b");
  return -std::log(sb / s0) / (b_s_mm2 / seq::kBInternalToSmm2);
}

}  // namespace sdmri::analysis
