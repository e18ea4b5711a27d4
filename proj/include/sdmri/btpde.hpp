#pragma once

#include <Eigen/Dense>
#include <limits>

#include "sdmri/fem.hpp"
#include "sdmri/mf.hpp"
#include "sdmri/seq.hpp"

namespace sdmri::btpde {

struct BtpdeOptions {
  double atol = 1e-4;
  double rtol = 1e-2;
  double max_step_ms = std::numeric_limits<double>::infinity();
  double theta = 0.5;  // implicit weight in [0.5, 1]
};

/// Preset used for ADC and cross-validation studies.
inline BtpdeOptions high_accuracy() { return {1e-6, 1e-4}; }

struct Magnetization {
  Eigen::VectorXcd xi;  // nodal coefficients
  long steps_taken = 0;
};

/// Integrates M xi' = -(S + i gamma f(t) W_J) xi, xi(0) = rho 1, up to
/// t_stop (default: the echo time) with theta stepping and step-doubling
/// error control. W_J uses coordinates centered at the domain centroid, the
/// same convention as the reduced model, so nodal fields and complex signals
/// are directly comparable between the two engines.
Magnetization btpde_magnetization(const fem::FemMatrices& fem, const seq::Gradient& g,
                                  const seq::Pgse& s, const BtpdeOptions& opts, double rho,
                                  double t_stop = -1);

mf::SignalRecord btpde_signal(const fem::FemMatrices& fem, const seq::Gradient& g,
                              const seq::Pgse& s, const BtpdeOptions& opts, double rho);

/// Two-point ADC: -(log S(b1) - log S(0)) / b1 with b1 = 1 s/mm^2, using
/// signal magnitudes. Result in um^2/ms.
double btpde_adc(const fem::FemMatrices& fem, const seq::Vec3& u_g, const seq::Pgse& s,
                 const BtpdeOptions& opts, double rho);

}  // namespace sdmri::btpde
