#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "sdmri/eig.hpp"
#include "sdmri/seq.hpp"

namespace sdmri::mf {

using Cplx = std::complex<double>;

/// Reduced model in the Laplace eigenbasis: diagonal L (eigenvalues) and the
/// three dense symmetric first-moment matrices A^i = P^T J^i P. The moment
/// matrices are stored with coordinates centered at the domain centroid,
/// which changes the signal only by a phase; `a1` keeps the uncentered first
/// row (a_1n), whose first column is the centroid itself.
struct MFModel {
  Eigen::VectorXd L;                 // ms^-1
  std::array<Eigen::MatrixXd, 3> A;  // N_eig x N_eig, um (centered)
  Eigen::MatrixXd a1;                // 3 x N_eig, um (uncentered first row)
  std::array<double, 3> center{};    // domain centroid, um
  double volume = 0;                 // um^3
  double rho = 1;
  double D0 = 0;
  Sha256 mesh_fingerprint{};

  int neig() const { return static_cast<int>(L.size()); }
  /// n + 3 n(n-1)/2: diagonal of L plus three symmetric moment matrices.
  long long param_count() const {
    const long long n = neig();
    return n + 3 * n * (n - 1) / 2;
  }
  double s0() const { return rho * volume; }
};

struct SignalRecord {
  std::string seq_id;
  double delta_ms = 0;
  double Delta_ms = 0;
  double b_s_mm2 = 0;
  seq::Vec3 direction{1, 0, 0};
  double amplitude_T_m = 0;
  std::string method;  // MF | MFGA | BTPDE
  Cplx signal{};
  double attenuation = 0;
  int neig = 0;
  // Populated for BTPDE records only.
  double atol = 0;
  double rtol = 0;
  long steps_taken = 0;
};

/// Builds the reduced model from a Laplace eigendecomposition and the
/// assembled FEM matrices. Both must come from the same mesh (fingerprints
/// are compared).
MFModel build_model(const eig::LaplaceEig& eig, const fem::FemMatrices& fem, double rho);

/// H11 of e^{-K delta} e^{-L (Delta-delta)} e^{-K* delta} with
/// K = L + i gamma W(g), evaluated by diagonalizing K; falls back to direct
/// scaling-and-squaring exponentials when the eigenvector matrix is
/// ill-conditioned. `reversed` evaluates the opposite exponential ordering
/// (same value in exact arithmetic).
Cplx h11(const MFModel& model, const seq::Gradient& g, const seq::Pgse& s,
         bool reversed = false);

SignalRecord mf_signal(const MFModel& model, const seq::Gradient& g, const seq::Pgse& s);

/// Same pipeline on the principal submodel restricted to `keep` (0-based
/// eigenmode indices). `keep` must contain mode 0 (the constant mode).
SignalRecord mf_signal_subset(const MFModel& model, const std::vector<int>& keep,
                              const seq::Gradient& g, const seq::Pgse& s);

MFModel submodel(const MFModel& model, const std::vector<int>& keep);

/// The PGSE diffusion-time factor
/// J(lambda,f) = lambda int F (int e^{-lambda(t-s)} f) / (D0 int F^2)
/// in closed form, with a series branch below lambda*TE ~ 1e-6. Units um^-2.
double j_factor(double lambda, const seq::Pgse& s, double D0);

/// Matrix Formalism effective diffusion tensor,
/// D^MF = D0 sum_n J(lambda_n,f) a_1n a_1n^T (um^2/ms).
Eigen::Matrix3d d_mf_tensor(const MFModel& model, const seq::Pgse& s);

/// Gaussian approximation: S = rho |Omega| exp(-u^T D^MF u b).
SignalRecord mfga_signal(const MFModel& model, double b_s_mm2, const seq::Vec3& u_g,
                         const seq::Pgse& s);

/// CSV serialization of signal records (header + one row per record).
/// Records with method BTPDE carry the extra atol/rtol/steps columns.
std::string signals_to_csv(const std::vector<SignalRecord>& recs);
std::string signals_to_json(const std::vector<SignalRecord>& recs);
std::vector<SignalRecord> signals_from_csv(const std::string& text);

}  // namespace sdmri::mf
