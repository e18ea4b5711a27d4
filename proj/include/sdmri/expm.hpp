#pragma once

#include <Eigen/Dense>
#include <complex>

namespace sdmri {

/// Dense complex matrix exponential by Pade approximation with scaling and
/// squaring (the [13/13] ladder with the usual order-selection thresholds).
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a);

}  // namespace sdmri
