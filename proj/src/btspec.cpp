#include "sdmri/btspec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sdmri::btspec {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

double norm1(const MatrixXcd& a) {
  double best = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) best = std::max(best, a.col(j).cwiseAbs().sum());
  return best;
}

}  // namespace

BtEig bt_eigendecomposition(const mf::MFModel& model, const seq::Gradient& g) {
  const int n = model.neig();
  BtEig bt;
  bt.g = g;

  MatrixXcd k(n, n);
  {
    const seq::Vec3 gv = g.g();
    MatrixXd w = MatrixXd::Zero(n, n);
    for (int axis = 0; axis < 3; ++axis)
      if (gv[axis] != 0) w += gv[axis] * model.A[axis];
    k.real() = MatrixXd::Zero(n, n);
    k.real().diagonal() = model.L;
    k.imag() = seq::kGammaInternal * w;
  }

  Eigen::ComplexEigenSolver<MatrixXcd> ces(k, true);
  if (ces.info() != Eigen::Success) throw NumericError("BT eigendecomposition failed");

  // Sort by ascending real part; ties broken by ascending imaginary part.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const VectorXcd mu_raw = ces.eigenvalues();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (mu_raw[a].real() != mu_raw[b].real()) return mu_raw[a].real() < mu_raw[b].real();
    return mu_raw[a].imag() < mu_raw[b].imag();
  });

  bt.mus.resize(n);
  MatrixXcd v(n, n);
  for (int i = 0; i < n; ++i) {
    bt.mus[i] = mu_raw[order[i]];
    v.col(i) = ces.eigenvectors().col(order[i]);
  }

  MatrixXcd vinv = v.partialPivLu().inverse();

  // Rescale so each psi coefficient row has unit Euclidean norm; the columns
  // of V absorb the inverse factors, keeping V Vinv = I and the
  // reconstruction invariant.
  for (int j = 0; j < n; ++j) {
    const double r = vinv.row(j).norm();
    if (r > 0) {
      vinv.row(j) /= r;
      v.col(j) *= r;
    }
  }

  bt.cond1 = norm1(v) * norm1(vinv);
  bt.ill_conditioned = !(bt.cond1 <= 1e10);
  bt.V = std::move(v);
  bt.Vinv = std::move(vinv);
  return bt;
}

Eigen::VectorXcd psi_nodal(const BtEig& bt, const eig::LaplaceEig& eig, int j) {
  if (j < 0 || j >= bt.neig()) throw InputError("BT eigenfunction index out of range");
  if (eig.neig() != bt.neig()) throw InputError("eigendecomposition size mismatch");
  return eig.P * bt.Vinv.row(j).transpose();
}

SupportRegion support_region(const BtEig& bt, const eig::LaplaceEig& eig, int j, double frac) {
  const VectorXcd psi = psi_nodal(bt, eig, j);
  SupportRegion out;
  out.max_abs_psi = psi.cwiseAbs().maxCoeff();
  const double cut = frac * out.max_abs_psi;
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double a = std::abs(psi[i]);
    if (a >= cut) {
      out.nodes.push_back(static_cast<int>(i));
      out.abs_psi.push_back(a);
    }
  }
  return out;
}

std::vector<int> significant_bt(const BtEig& bt, double threshold) {
  std::vector<int> out;
  for (int j = 0; j < bt.neig(); ++j)
    if (std::abs(bt.V(0, j)) >= threshold) out.push_back(j);
  return out;
}

Eigen::MatrixXcd a_delta_matrix(const BtEig& bt, double delta_ms) {
  if (delta_ms < 0) throw InputError("delta must be >= 0");
  const int n = bt.neig();
  MatrixXcd a(n, n);
  for (int j = 0; j < n; ++j) {
    const Cplx w = bt.V(0, j) * std::exp(-bt.mus[j] * delta_ms);
    a.row(j) = w * bt.Vinv.row(j);
  }
  return a;
}

Eigen::VectorXcd laplace_coeffs_at(const BtEig& bt, double delta_ms) {
  return a_delta_matrix(bt, delta_ms).colwise().sum().transpose();
}

Eigen::VectorXcd magnetization_at_echo(const BtEig& bt, const eig::LaplaceEig& eig,
                                       const mf::MFModel& model, const seq::Pgse& s) {
  const int n = bt.neig();
  if (eig.neig() != n) throw InputError("eigendecomposition size mismatch");
  const double delta = s.delta_ms;
  const double sep = s.Delta_ms - s.delta_ms;

  // rho sqrt|Omega| [V_11..] e^{-Sigma d} V^-1 e^{-L(D-d)} (V^-1)* e^{-Sigma* d} V*
  Eigen::RowVectorXcd row = bt.V.row(0);
  for (int j = 0; j < n; ++j) row[j] *= std::exp(-bt.mus[j] * delta);
  row = row * bt.Vinv;
  for (int j = 0; j < n; ++j) row[j] *= std::exp(-model.L[j] * sep);
  row = row * bt.Vinv.adjoint();
  for (int j = 0; j < n; ++j) row[j] *= std::exp(-std::conj(bt.mus[j]) * delta);
  row = row * bt.V.adjoint();
  row *= model.rho * std::sqrt(model.volume);

  return eig.P * row.transpose();
}

}  // namespace sdmri::btspec
