#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>

#include "sdmri/fem.hpp"

namespace sdmri::eig {

/// Laplace eigendecomposition restricted to an eigenvalue interval.
/// lambdas are non-decreasing with lambda_1 = 0 (connected domain); columns
/// of P are M-orthonormal, sign-fixed so the first non-negligible entry of
/// each column is positive.
struct LaplaceEig {
  Eigen::VectorXd lambdas;  // ms^-1
  Eigen::MatrixXd P;        // N_v x N_eig
  double l_s_min = 0;       // um
  double D0 = 0;            // um^2/ms
  Sha256 mesh_fingerprint{};

  int neig() const { return static_cast<int>(lambdas.size()); }
  int num_nodes() const { return static_cast<int>(P.rows()); }
};

struct SolveOptions {
  int dense_threshold = 2000;  // dense generalized solve for N_v <= this
  int slice_max = 48;          // target eigenvalue count per spectrum slice
  int max_restarts = 10;       // Lanczos restarts before a slice is split
  double residual_tol = 1e-8;  // ||S p - lambda M p|| <= tol ||S||_inf ||p||
  bool force_lanczos = false;
  bool force_dense = false;
};

/// Upper end of the requested eigenvalue interval, (pi / l_s_min)^2 D0.
double lambda_interval_max(double l_s_min, double D0);

/// Eigenvalue -> spatial length scale, pi / sqrt(lambda/D0); +inf at 0.
double length_scale(double lambda, double D0);

/// Solves S p = lambda M p for every eigenvalue in [0, (pi/l_s_min)^2 D0].
/// Completeness is certified by matrix inertia: the eigenvalue count below
/// the interval end from an LDL^T factorization of S - sigma M must equal
/// the number of returned pairs.
LaplaceEig solve_interval(const fem::FemMatrices& fem, double l_s_min,
                          const SolveOptions& opts = {});

/// Number of pencil eigenvalues strictly below sigma (Sylvester inertia of
/// S - sigma M). Retries with nudged shifts when a factorization degenerates.
int inertia_below(const Eigen::SparseMatrix<double>& S, const Eigen::SparseMatrix<double>& M,
                  double sigma);

void save_eig(const LaplaceEig& e, const std::string& path);

/// Loads a persisted decomposition. If expect_fingerprint is non-null the
/// stored mesh fingerprint must match.
LaplaceEig load_eig(const std::string& path, const Sha256* expect_fingerprint = nullptr);

}  // namespace sdmri::eig
