#include "sdmri/expm.hpp"

#include <cmath>

namespace sdmri {

namespace {

using Eigen::MatrixXcd;

double norm1(const MatrixXcd& a) {
  double best = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) best = std::max(best, a.col(j).cwiseAbs().sum());
  return best;
}

MatrixXcd pade_solve(const MatrixXcd& u, const MatrixXcd& v) {
  // r = (v - u)^{-1} (v + u)
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) {
  const Eigen::Index n = a.rows();
  const MatrixXcd id = MatrixXcd::Identity(n, n);
  const double nrm = norm1(a);

  const MatrixXcd a2 = a * a;
  if (nrm <= 1.495585217958292e-2) {  // Pade 3
    const double b[] = {120, 60, 12, 1};
    const MatrixXcd u = a * (b[3] * a2 + b[1] * id);
    const MatrixXcd v = b[2] * a2 + b[0] * id;
    return pade_solve(u, v);
  }
  const MatrixXcd a4 = a2 * a2;
  if (nrm <= 2.539398330063230e-1) {  // Pade 5
    const double b[] = {30240, 15120, 3360, 420, 30, 1};
    const MatrixXcd u = a * (b[5] * a4 + b[3] * a2 + b[1] * id);
    const MatrixXcd v = b[4] * a4 + b[2] * a2 + b[0] * id;
    return pade_solve(u, v);
  }
  const MatrixXcd a6 = a4 * a2;
  if (nrm <= 9.504178996162932e-1) {  // Pade 7
    const double b[] = {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
    const MatrixXcd u = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    const MatrixXcd v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    return pade_solve(u, v);
  }
  if (nrm <= 2.097847961257068e0) {  // Pade 9
    const double b[] = {17643225600, 8821612800, 2075673600, 302702400, 30270240,
                        2162160,     110880,     3960,       90,        1};
    const MatrixXcd a8 = a6 * a2;
    const MatrixXcd u = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    const MatrixXcd v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    return pade_solve(u, v);
  }

  // Pade 13 with scaling by 2^s.
  const double theta13 = 5.371920351148152e0;
  int s = 0;
  if (nrm > theta13) s = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
  const double scale = std::ldexp(1.0, -s);
  const MatrixXcd as = a * scale;
  const MatrixXcd s2 = as * as;
  const MatrixXcd s4 = s2 * s2;
  const MatrixXcd s6 = s4 * s2;
  const double b[] = {64764752532480000.0,
                      32382376266240000.0,
                      7771770303897600.0,
                      1187353796428800.0,
                      129060195264000.0,
                      10559470521600.0,
                      670442572800.0,
                      33522128640.0,
                      1323241920.0,
                      40840800.0,
                      960960.0,
                      16380.0,
                      182.0,
                      1.0};
  const MatrixXcd u =
      as * (s6 * (b[13] * s6 + b[11] * s4 + b[9] * s2) + b[7] * s6 + b[5] * s4 + b[3] * s2 +
            b[1] * id);
  const MatrixXcd v =
      s6 * (b[12] * s6 + b[10] * s4 + b[8] * s2) + b[6] * s6 + b[4] * s4 + b[2] * s2 + b[0] * id;
  MatrixXcd r = pade_solve(u, v);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

}  // namespace sdmri
