#pragma once

// Independent analytic Matrix Formalism oracle on a 1-D interval [0, H] with
// reflecting ends: closed-form cosine eigenbasis, closed-form first moments,
// and a Taylor-with-scaling matrix exponential. Deliberately shares no code
// path with the library implementation it cross-checks.

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace oracle {

struct Mf1d {
  double H = 0;
  double D0 = 0;
  Eigen::VectorXd lambdas;  // ms^-1, lambda_0 = 0
  Eigen::MatrixXd moment;   // a_{mn} = int x phi_m phi_n, um
};

Mf1d build_1d_model(double H, double D0, int n_modes);

/// H11 of e^{-K d} e^{-L (D-d)} e^{-K* d} for a gradient along the interval.
std::complex<double> mf_1d_h11(const Mf1d& m, double delta_ms, double Delta_ms,
                               double amplitude_T_m);

/// Attenuation |S|/S0 of the 1-D interval for the given PGSE b-value.
double attenuation_1d(double H, double D0, double delta_ms, double Delta_ms, double b_s_mm2,
                      int n_modes = 60);

/// Analytic Neumann box eigenvalues D0 pi^2 (i^2/Lx^2 + j^2/Ly^2 + k^2/Lz^2)
/// up to lam_max, sorted ascending (multiplicities repeated).
std::vector<double> box_eigenvalues(double lx, double ly, double lz, double D0, double lam_max);

Eigen::MatrixXcd expm_taylor(const Eigen::MatrixXcd& a);

}  // namespace oracle
