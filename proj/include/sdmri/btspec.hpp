#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "sdmri/eig.hpp"
#include "sdmri/mf.hpp"
#include "sdmri/seq.hpp"

namespace sdmri::btspec {

using Cplx = std::complex<double>;

/// Eigendecomposition of K(g) = L + i gamma W(g), reinterpreted as the
/// Bloch-Torrey operator spectrum in the Laplace eigenbasis. Eigenfunction
/// coefficient rows (rows of V^-1) are rescaled to unit Euclidean norm --
/// unit L2 norm of psi_j by Laplace-basis orthonormality -- and the
/// projection coefficients V_1j are rescaled inversely so the reconstructed
/// field is unchanged.
struct BtEig {
  Eigen::VectorXcd mus;   // ms^-1, sorted by Re ascending, ties by Im
  Eigen::MatrixXcd V;     // column-rescaled eigenvector matrix (V Vinv = I)
  Eigen::MatrixXcd Vinv;  // unit-norm psi coefficient rows
  seq::Gradient g;
  double cond1 = 0;            // 1-norm condition estimate of V
  bool ill_conditioned = false;  // cond1 > 1e10; decomposition still returned

  int neig() const { return static_cast<int>(mus.size()); }
  /// Compensated projection coefficients of the constant initial density
  /// (first row of the rescaled V).
  Eigen::VectorXcd projection_row() const { return V.row(0).transpose(); }
};

BtEig bt_eigendecomposition(const mf::MFModel& model, const seq::Gradient& g);

/// Nodal values of psi_j: P * Vinv.row(j)^T (no conjugation).
Eigen::VectorXcd psi_nodal(const BtEig& bt, const eig::LaplaceEig& eig, int j);

struct SupportRegion {
  std::vector<int> nodes;        // indices where |psi| >= frac * max |psi|
  std::vector<double> abs_psi;   // |psi| at those nodes
  double max_abs_psi = 0;
};

SupportRegion support_region(const BtEig& bt, const eig::LaplaceEig& eig, int j,
                             double frac = 0.01);

/// Indices j with |V_1j| >= threshold under the unit-norm convention.
std::vector<int> significant_bt(const BtEig& bt, double threshold = 0.01);

/// A(delta) = diag(V_1j e^{-mu_j delta}) V^-1. Invariant under the psi
/// normalization rescaling.
Eigen::MatrixXcd a_delta_matrix(const BtEig& bt, double delta_ms);

/// Column sums of A(delta): Laplace coefficients c_k(delta) of the
/// magnetization at the end of the first pulse (M = rho sqrt|Omega| sum c_k phi_k).
Eigen::VectorXcd laplace_coeffs_at(const BtEig& bt, double delta_ms);

/// Nodal magnetization at the echo reconstructed from the BT spectrum;
/// integrates to exactly the reduced-model signal.
Eigen::VectorXcd magnetization_at_echo(const BtEig& bt, const eig::LaplaceEig& eig,
                                       const mf::MFModel& model, const seq::Pgse& s);

}  // namespace sdmri::btspec
