#include "oracles/oracle1d.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

namespace {
constexpr double kGamma = 0.267513;  // rad ms^-1 um^-1 (T/m)^-1
}

Mf1d build_1d_model(double H, double D0, int n_modes) {
  Mf1d m;
  m.H = H;
  m.D0 = D0;
  m.lambdas.resize(n_modes);
  m.moment.resize(n_modes, n_modes);
  for (int k = 0; k < n_modes; ++k) m.lambdas[k] = D0 * (k * M_PI / H) * (k * M_PI / H);

  auto parity = [](int q) { return q % 2 == 0 ? 1.0 : -1.0; };
  for (int a = 0; a < n_modes; ++a) {
    for (int b = a; b < n_modes; ++b) {
      double v;
      if (a == 0 && b == 0) {
        v = H / 2.0;
      } else if (a == 0) {
        v = std::sqrt(2.0) * H * (parity(b) - 1.0) / (b * b * M_PI * M_PI);
      } else if (a == b) {
        v = H / 2.0;
      } else {
        const int p = b + a, q = b - a;
        v = H / (M_PI * M_PI) *
            ((parity(p) - 1.0) / (p * p) + (parity(q) - 1.0) / (q * q));
      }
      m.moment(a, b) = m.moment(b, a) = v;
    }
  }
  return m;
}

Eigen::MatrixXcd expm_taylor(const Eigen::MatrixXcd& a) {
  double nrm = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) nrm = std::max(nrm, a.col(j).cwiseAbs().sum());
  int s = 0;
  if (nrm > 0.5) s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  const Eigen::MatrixXcd b = a * std::ldexp(1.0, -s);
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
  Eigen::MatrixXcd sum = term;
  for (int k = 1; k <= 24; ++k) {
    term = (term * b) / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

std::complex<double> mf_1d_h11(const Mf1d& m, double delta_ms, double Delta_ms,
                               double amplitude_T_m) {
  const int n = static_cast<int>(m.lambdas.size());
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(n, n);
  k.imag() = kGamma * amplitude_T_m * m.moment;
  for (int i = 0; i < n; ++i) k(i, i) += m.lambdas[i];

  const Eigen::MatrixXcd e1 = expm_taylor(-delta_ms * k);
  const Eigen::MatrixXcd e2 = e1.conjugate();  // K symmetric => e^{-K* d} = conj(e^{-K d})
  std::complex<double> acc = 0;
  for (int j = 0; j < n; ++j)
    acc += e1(0, j) * std::exp(-(Delta_ms - delta_ms) * m.lambdas[j]) * e2(j, 0);
  return acc;
}

double attenuation_1d(double H, double D0, double delta_ms, double Delta_ms, double b_s_mm2,
                      int n_modes) {
  const double b_int = b_s_mm2 / 1e3;  // ms/um^2
  const double f2 = delta_ms * delta_ms * (Delta_ms - delta_ms / 3.0);
  const double amplitude = std::sqrt(b_int / (kGamma * kGamma * f2));
  const Mf1d m = build_1d_model(H, D0, n_modes);
  return std::abs(mf_1d_h11(m, delta_ms, Delta_ms, amplitude));
}

std::vector<double> box_eigenvalues(double lx, double ly, double lz, double D0, double lam_max) {
  std::vector<double> out;
  auto axis_max = [&](double l) {
    return static_cast<int>(std::floor(l / M_PI * std::sqrt(lam_max / D0))) + 1;
  };
  const int mi = axis_max(lx), mj = axis_max(ly), mk = axis_max(lz);
  for (int i = 0; i <= mi; ++i)
    for (int j = 0; j <= mj; ++j)
      for (int k = 0; k <= mk; ++k) {
        const double lam =
            D0 * M_PI * M_PI * (i * i / (lx * lx) + j * j / (ly * ly) + k * k / (lz * lz));
        if (lam <= lam_max) out.push_back(lam);
      }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle
