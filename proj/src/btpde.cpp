#include "sdmri/btpde.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <complex>

namespace sdmri::btpde {

namespace {

using Cplx = std::complex<double>;
using SpMatC = Eigen::SparseMatrix<Cplx>;
using SpMatD = Eigen::SparseMatrix<double>;
using Eigen::VectorXcd;

struct ThetaStepper {
  const SpMatC& m;
  const SpMatC& a;
  double theta;
  double h = -1;
  Eigen::SparseLU<SpMatC> lhs_full, lhs_half;
  SpMatC rhs_full, rhs_half;

  void set_step(double new_h) {
    if (new_h == h) return;
    h = new_h;
    auto build = [&](double hh, Eigen::SparseLU<SpMatC>& lhs, SpMatC& rhs) {
      SpMatC left = m + Cplx(theta * hh) * a;
      left.makeCompressed();
      lhs.compute(left);
      if (lhs.info() != Eigen::Success)
        throw NumericError("BTPDE: sparse LU factorization failed (h=" + format_g17(hh) + ")");
      rhs = m - Cplx((1.0 - theta) * hh) * a;
      rhs.makeCompressed();
    };
    build(h, lhs_full, rhs_full);
    build(0.5 * h, lhs_half, rhs_half);
  }

  VectorXcd full_step(const VectorXcd& xi) const { return lhs_full.solve(rhs_full * xi); }
  VectorXcd half_step(const VectorXcd& xi) const { return lhs_half.solve(rhs_half * xi); }
};

// Advances xi over [0, len] for one constant-profile subinterval.
void integrate_interval(const SpMatC& m, const SpMatC& a, double len, const BtpdeOptions& opts,
                        VectorXcd& xi, long& steps) {
  if (len <= 0) return;
  ThetaStepper st{m, a, opts.theta};
  const int p = (opts.theta == 0.5) ? 2 : 1;
  const double err_div = std::pow(2.0, p) - 1.0;
  double t = 0;
  double h = std::min({opts.max_step_ms, len / 8});
  while (t < len) {
    bool truncated = false;
    double h_try = h;
    if (t + h_try > len) {
      h_try = len - t;
      truncated = true;
    }
    if (h_try < 1e-10) {
      if (truncated) break;  // only roundoff remains
      throw NumericError("BTPDE: step size underflow");
    }
    st.set_step(h_try);
    const VectorXcd x_full = st.full_step(xi);
    const VectorXcd x_half = st.half_step(st.half_step(xi));
    double err = 0;
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
      const double scale = opts.atol + opts.rtol * std::abs(x_half[i]);
      err = std::max(err, std::abs(x_full[i] - x_half[i]) / scale);
    }
    err /= err_div;
    if (err <= 1.0) {
      xi = x_half;
      t += h_try;
      ++steps;
      const double grow = 0.9 * std::pow(std::max(err, 1e-10), -1.0 / (p + 1));
      if (!truncated && grow > 1.5) h = std::min({h_try * std::min(grow, 4.0), opts.max_step_ms});
    } else {
      const double shrink = std::max(0.2, 0.9 * std::pow(err, -1.0 / (p + 1)));
      h = h_try * shrink;
    }
  }
}

}  // namespace

Magnetization btpde_magnetization(const fem::FemMatrices& fem, const seq::Gradient& g,
                                  const seq::Pgse& s, const BtpdeOptions& opts, double rho,
                                  double t_stop) {
  if (!(opts.atol > 0) || !(opts.rtol > 0)) throw InputError("BTPDE tolerances must be positive");
  if (opts.theta < 0.5 || opts.theta > 1.0) throw InputError("theta must be in [0.5, 1]");
  const double te = s.te();
  if (t_stop < 0) t_stop = te;
  if (t_stop > te) throw InputError("t_stop beyond echo time");

  const SpMatD S = fem.stiffness.to_full();
  const SpMatD M = fem.mass.to_full();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(M.rows());
  const double vol = ones.dot(M * ones);

  SpMatD wj(M.rows(), M.cols());
  const seq::Vec3 gv = g.g();
  for (int axis = 0; axis < 3; ++axis) {
    if (gv[axis] == 0) continue;
    // Centered coordinate moments: J^i - c_i M.
    const SpMatD J = fem.moment[axis].to_full();
    const double c = ones.dot(J * ones) / vol;
    wj += gv[axis] * (J - c * M);
  }

  const SpMatC mc = M.cast<Cplx>();
  const SpMatC sc = S.cast<Cplx>();
  SpMatC a_pulse;  // S + i gamma W_J, first pulse
  if (g.amplitude != 0) {
    SpMatC wc = wj.cast<Cplx>();
    a_pulse = sc + Cplx(0, seq::kGammaInternal) * wc;
  } else {
    a_pulse = sc;
  }
  SpMatC a_neg = a_pulse.conjugate();  // f = -1: S - i gamma W_J

  Magnetization out;
  out.xi = VectorXcd::Constant(M.rows(), Cplx(rho, 0));

  const double stops[3] = {s.delta_ms, s.Delta_ms, te};
  const SpMatC* ops[3] = {&a_pulse, &sc, &a_neg};
  double t0 = 0;
  for (int k = 0; k < 3; ++k) {
    const double t1 = std::min(stops[k], t_stop);
    integrate_interval(mc, *ops[k], t1 - t0, opts, out.xi, out.steps_taken);
    t0 = std::max(t0, t1);
    if (t_stop <= stops[k]) break;
  }
  return out;
}

mf::SignalRecord btpde_signal(const fem::FemMatrices& fem, const seq::Gradient& g,
                              const seq::Pgse& s, const BtpdeOptions& opts, double rho) {
  const Magnetization sol = btpde_magnetization(fem, g, s, opts, rho);
  const SpMatD M = fem.mass.to_full();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(M.rows());
  const double s0 = rho * ones.dot(M * ones);

  mf::SignalRecord r;
  r.seq_id = s.id;
  r.delta_ms = s.delta_ms;
  r.Delta_ms = s.Delta_ms;
  r.b_s_mm2 = seq::bvalue(s, g.amplitude);
  r.direction = g.direction;
  r.amplitude_T_m = g.amplitude;
  r.method = "BTPDE";
  r.signal = (ones.cast<Cplx>().transpose() * (M.cast<Cplx>() * sol.xi))(0);
  r.attenuation = std::abs(r.signal) / s0;
  r.neig = 0;
  r.atol = opts.atol;
  r.rtol = opts.rtol;
  r.steps_taken = sol.steps_taken;
  return r;
}

double btpde_adc(const fem::FemMatrices& fem, const seq::Vec3& u_g, const seq::Pgse& s,
                 const BtpdeOptions& opts, double rho) {
  const double b1 = 1.0;  // s/mm^2
  const seq::Gradient g(u_g, seq::amplitude_for_b(s, b1));
  const mf::SignalRecord rec = btpde_signal(fem, g, s, opts, rho);
  // The theta scheme conserves the g = 0 signal exactly, so S(0) = rho |Omega|.
  if (!(rec.attenuation > 0)) throw NumericError("BTPDE ADC: non-positive signal magnitude");
  return -std::log(rec.attenuation) / (b1 / seq::kBInternalToSmm2);
}

}  // namespace sdmri::btpde
