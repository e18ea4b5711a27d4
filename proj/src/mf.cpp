#include "sdmri/mf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "sdmri/expm.hpp"

namespace sdmri::mf {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

double norm1(const MatrixXcd& a) {
  double best = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) best = std::max(best, a.col(j).cwiseAbs().sum());
  return best;
}

// (1 - e^{-s}) / s
double em1_over(double s) {
  if (std::abs(s) < 1e-5) return 1.0 - s / 2.0 + s * s / 6.0 - s * s * s / 24.0;
  return -std::expm1(-s) / s;
}

// (s - 1 + e^{-s}) / s^2 = sum_{k>=2} (-s)^{k-2} / k!
double phi2(double s) {
  if (std::abs(s) < 5e-2) {
    double sum = 0.0, spow = 1.0, fact = 2.0;
    for (int k = 2; k <= 12; ++k) {
      sum += spow / fact;
      spow *= -s;
      fact *= (k + 1);
    }
    return sum;
  }
  return (s - 1.0 + std::exp(-s)) / (s * s);
}

// (s - 2 + (2 + s) e^{-s}) / s^3 = sum_{k>=3} (k-2) (-s)^{k-3} / k!
double phi3(double s) {
  if (std::abs(s) < 5e-2) {
    double sum = 0.0, spow = 1.0, fact = 6.0;
    for (int k = 3; k <= 13; ++k) {
      sum += (k - 2) * spow / fact;
      spow *= -s;
      fact *= (k + 1);
    }
    return sum;
  }
  return (s - 2.0 + (2.0 + s) * std::exp(-s)) / (s * s * s);
}

}  // namespace

MFModel build_model(const eig::LaplaceEig& eig, const fem::FemMatrices& fem, double rho) {
  if (eig.mesh_fingerprint != fem.mesh_fingerprint)
    throw InputError("eigendecomposition and FEM matrices come from different meshes");

  MFModel model;
  model.L = eig.lambdas;
  model.rho = rho;
  model.D0 = fem.D0;
  model.mesh_fingerprint = fem.mesh_fingerprint;

  const Eigen::SparseMatrix<double> M = fem.mass.to_full();
  const VectorXd ones = VectorXd::Ones(M.rows());
  model.volume = ones.dot(M * ones);

  const int neig = eig.neig();
  model.a1.resize(3, neig);
  for (int axis = 0; axis < 3; ++axis) {
    const Eigen::SparseMatrix<double> J = fem.moment[axis].to_full();
    model.center[axis] = ones.dot(J * ones) / model.volume;
    MatrixXd raw = eig.P.transpose() * (J * eig.P);
    raw = 0.5 * (raw + raw.transpose()).eval();
    model.a1.row(axis) = raw.row(0);
    raw.diagonal().array() -= model.center[axis];
    model.A[axis] = std::move(raw);
  }
  return model;
}

Cplx h11(const MFModel& model, const seq::Gradient& g, const seq::Pgse& s, bool reversed) {
  const int n = model.neig();
  const double delta = s.delta_ms;
  const double sep = s.Delta_ms - s.delta_ms;

  if (g.amplitude == 0.0) {
    // K = L diagonal; lambda_1 = 0 makes H11 exactly 1.
    return std::exp(-model.L[0] * (2 * delta + sep));
  }

  const seq::Vec3 gv = g.g();
  MatrixXd w = gv[0] * model.A[0];
  if (gv[1] != 0) w += gv[1] * model.A[1];
  if (gv[2] != 0) w += gv[2] * model.A[2];

  MatrixXcd k(n, n);
  k.real() = MatrixXd::Zero(n, n);
  k.imag() = seq::kGammaInternal * w;
  k.real().diagonal() = model.L;

  const VectorXd mid = (-sep * model.L.array()).exp().matrix();

  Eigen::ComplexEigenSolver<MatrixXcd> ces(k, /*computeEigenvectors=*/true);
  bool use_diag = ces.info() == Eigen::Success;
  MatrixXcd vinv;
  if (use_diag) {
    const MatrixXcd& v = ces.eigenvectors();
    Eigen::PartialPivLU<MatrixXcd> lu(v);
    vinv = lu.inverse();
    const double cond1 = norm1(v) * norm1(vinv);
    const double resid = (k * v - v * ces.eigenvalues().asDiagonal().toDenseMatrix()).norm();
    if (!(cond1 < 1e8) || !(resid <= 1e-9 * k.norm())) use_diag = false;
  }

  if (use_diag) {
    const MatrixXcd& v = ces.eigenvectors();
    const VectorXcd ed = (-delta * ces.eigenvalues().array()).exp().matrix();
    if (!reversed) {
      // e1' V E Vinv diag(mid) Vinv* E* V* e1, evaluated right to left.
      VectorXcd x = v.row(0).adjoint();            // V* e1
      x.array() *= ed.conjugate().array();         // E* x
      x = vinv.adjoint() * x;                      // (V^-1)* x
      x.array() *= mid.array();                    // diag(mid) x
      x = vinv * x;                                // V^-1 x
      x.array() *= ed.array();                     // E x
      return (v.row(0) * x)(0);
    }
    // e1' (V^-1)* E* V* diag(mid) V E V^-1 e1
    VectorXcd x = vinv.col(0);                     // V^-1 e1
    x.array() *= ed.array();
    x = v * x;
    x.array() *= mid.array();
    x = v.adjoint() * x;                           // V* x
    x.array() *= ed.conjugate().array();
    x = vinv.adjoint() * x;                        // (V^-1)* x
    return x(0);
  }

  // Fallback: direct exponentials. K is symmetric, so e^{-K* delta} is the
  // conjugate of e^{-K delta}.
  const MatrixXcd e1m = expm(-delta * k);
  const MatrixXcd e2m = e1m.conjugate();
  if (!reversed) {
    Cplx acc = 0;
    for (int j = 0; j < n; ++j) acc += e1m(0, j) * mid[j] * e2m(j, 0);
    return acc;
  }
  Cplx acc = 0;
  for (int j = 0; j < n; ++j) acc += e2m(0, j) * mid[j] * e1m(j, 0);
  return acc;
}

namespace {

SignalRecord base_record(const seq::Pgse& s, const seq::Vec3& u, double amplitude,
                         const std::string& method, int neig) {
  SignalRecord r;
  r.seq_id = s.id;
  r.delta_ms = s.delta_ms;
  r.Delta_ms = s.Delta_ms;
  r.b_s_mm2 = seq::bvalue(s, amplitude);
  r.direction = u;
  r.amplitude_T_m = amplitude;
  r.method = method;
  r.neig = neig;
  return r;
}

}  // namespace

SignalRecord mf_signal(const MFModel& model, const seq::Gradient& g, const seq::Pgse& s) {
  SignalRecord r = base_record(s, g.direction, g.amplitude, "MF", model.neig());
  r.signal = model.s0() * h11(model, g, s);
  r.attenuation = std::abs(r.signal) / model.s0();
  return r;
}

MFModel submodel(const MFModel& model, const std::vector<int>& keep) {
  if (std::find(keep.begin(), keep.end(), 0) == keep.end())
    throw InputError("mode subset must contain the constant mode (index 0)");
  for (int idx : keep)
    if (idx < 0 || idx >= model.neig()) throw InputError("mode subset index out of range");
  MFModel out = model;
  const int m = static_cast<int>(keep.size());
  out.L.resize(m);
  out.a1.resize(3, m);
  for (int axis = 0; axis < 3; ++axis) out.A[axis].resize(m, m);
  for (int i = 0; i < m; ++i) {
    out.L[i] = model.L[keep[i]];
    out.a1.col(i) = model.a1.col(keep[i]);
    for (int axis = 0; axis < 3; ++axis)
      for (int j = 0; j < m; ++j) out.A[axis](i, j) = model.A[axis](keep[i], keep[j]);
  }
  return out;
}

SignalRecord mf_signal_subset(const MFModel& model, const std::vector<int>& keep,
                              const seq::Gradient& g, const seq::Pgse& s) {
  const MFModel sub = submodel(model, keep);
  SignalRecord r = mf_signal(sub, g, s);
  return r;
}

double j_factor(double lambda, const seq::Pgse& s, double D0) {
  if (lambda < 0) throw InputError("lambda must be non-negative");
  if (lambda == 0) return 0;
  const double delta = s.delta_ms;
  const double sep = s.Delta_ms - s.delta_ms;
  const double sd = lambda * delta;
  const double r = lambda * sep;
  const double d3 = delta * delta * delta;
  // int_0^TE F(t) (int_0^t e^{-lambda(t-u)} f(u) du) dt for the PGSE profile:
  const double integral = d3 * (phi3(sd) + std::exp(-r) * em1_over(sd) * phi2(sd)) +
                          delta * delta * sep * em1_over(sd) * em1_over(r);
  return lambda * integral / (D0 * s.f_square_integral());
}

Eigen::Matrix3d d_mf_tensor(const MFModel& model, const seq::Pgse& s) {
  Eigen::Matrix3d t = Eigen::Matrix3d::Zero();
  for (int n = 0; n < model.neig(); ++n) {
    const double j = j_factor(model.L[n], s, model.D0);
    if (j == 0) continue;
    const Eigen::Vector3d a = model.a1.col(n);
    t += j * a * a.transpose();
  }
  return model.D0 * t;
}

SignalRecord mfga_signal(const MFModel& model, double b_s_mm2, const seq::Vec3& u_g,
                         const seq::Pgse& s) {
  if (b_s_mm2 < 0) throw InputError("b-value must be >= 0");
  const seq::Gradient g(u_g, seq::amplitude_for_b(s, b_s_mm2));  // validates the direction
  const Eigen::Matrix3d d = d_mf_tensor(model, s);
  const Eigen::Vector3d u(u_g[0], u_g[1], u_g[2]);
  const double adc = u.dot(d * u);
  const double b_internal = b_s_mm2 / seq::kBInternalToSmm2;
  SignalRecord r = base_record(s, u_g, g.amplitude, "MFGA", model.neig());
  r.b_s_mm2 = b_s_mm2;
  r.signal = model.s0() * std::exp(-adc * b_internal);
  r.attenuation = std::abs(r.signal) / model.s0();
  return r;
}

std::string signals_to_csv(const std::vector<SignalRecord>& recs) {
  std::string out =
      "seq_id,delta_ms,Delta_ms,bvalue_s_mm2,gx,gy,gz,amplitude_T_m,method,re_signal,im_signal,"
      "attenuation,neig,atol,rtol,steps_taken\n";
  for (const auto& r : recs) {
    out += r.seq_id;
    for (double v : {r.delta_ms, r.Delta_ms, r.b_s_mm2, r.direction[0], r.direction[1],
                     r.direction[2], r.amplitude_T_m})
      out += "," + format_g17(v);
    out += "," + r.method;
    out += "," + format_g17(r.signal.real());
    out += "," + format_g17(r.signal.imag());
    out += "," + format_g17(r.attenuation);
    out += "," + std::to_string(r.neig);
    if (r.method == "BTPDE") {
      out += "," + format_g17(r.atol) + "," + format_g17(r.rtol) + "," +
             std::to_string(r.steps_taken);
    } else {
      out += ",,,";
    }
    out += '\n';
  }
  return out;
}

std::string signals_to_json(const std::vector<SignalRecord>& recs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : recs) {
    nlohmann::json j{{"seq_id", r.seq_id},
                     {"delta_ms", r.delta_ms},
                     {"Delta_ms", r.Delta_ms},
                     {"bvalue_s_mm2", r.b_s_mm2},
                     {"gx", r.direction[0]},
                     {"gy", r.direction[1]},
                     {"gz", r.direction[2]},
                     {"amplitude_T_m", r.amplitude_T_m},
                     {"method", r.method},
                     {"re_signal", r.signal.real()},
                     {"im_signal", r.signal.imag()},
                     {"attenuation", r.attenuation},
                     {"neig", r.neig}};
    if (r.method == "BTPDE") {
      j["atol"] = r.atol;
      j["rtol"] = r.rtol;
      j["steps_taken"] = r.steps_taken;
    }
    arr.push_back(std::move(j));
  }
  return arr.dump(1) + "\n";
}

std::vector<SignalRecord> signals_from_csv(const std::string& text) {
  std::vector<SignalRecord> recs;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 13) throw InputError("signals csv line " + std::to_string(lineno) +
                                            ": expected at least 13 columns");
    SignalRecord r;
    r.seq_id = cells[0];
    r.delta_ms = std::stod(cells[1]);
    r.Delta_ms = std::stod(cells[2]);
    r.b_s_mm2 = std::stod(cells[3]);
    r.direction = {std::stod(cells[4]), std::stod(cells[5]), std::stod(cells[6])};
    r.amplitude_T_m = std::stod(cells[7]);
    r.method = cells[8];
    r.signal = Cplx(std::stod(cells[9]), std::stod(cells[10]));
    r.attenuation = std::stod(cells[11]);
    r.neig = std::stoi(cells[12]);
    if (r.method == "BTPDE" && cells.size() >= 16 && !cells[13].empty()) {
      r.atol = std::stod(cells[13]);
      r.rtol = std::stod(cells[14]);
      r.steps_taken = std::stol(cells[15]);
    }
    recs.push_back(std::move(r));
  }
  return recs;
}

}  // namespace sdmri::mf
