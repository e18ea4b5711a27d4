#include "sdmri/eig.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <vector>

namespace sdmri::eig {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double inf_norm(const SpMat& a) {
  VectorXd row_sums = VectorXd::Zero(a.rows());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) row_sums[it.row()] += std::abs(it.value());
  return row_sums.size() ? row_sums.maxCoeff() : 0.0;
}

// Inertia of S - sigma*M via unpivoted sparse LDL^T. Returns the negative
// pivot count, or -1 when the factorization is unusable (zero/non-finite
// pivot) and the shift should be nudged.
int try_inertia(const SpMat& S, const SpMat& M, double sigma, double pivot_floor) {
  SpMat shifted = S - sigma * M;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  ldlt.compute(shifted);
  if (ldlt.info() != Eigen::Success) return -1;
  const VectorXd d = ldlt.vectorD();
  int neg = 0;
  double dmax = 0;
  for (int i = 0; i < d.size(); ++i) dmax = std::max(dmax, std::abs(d[i]));
  for (int i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i]) || std::abs(d[i]) <= pivot_floor * dmax) return -1;
    if (d[i] < 0) ++neg;
  }
  return neg;
}

struct EigPair {
  double lambda;
  VectorXd vec;  // M-normalized
};

// One deflated shift-invert Lanczos sweep at a fixed shift. Appends newly
// converged, residual-verified pairs (M-orthogonal to `converged`) with
// eigenvalues in [lo, hi). Returns the number of pairs added.
int lanczos_sweep(const SpMat& S, const SpMat& M, double sigma, double lo, double hi,
                  int want, int m_steps, std::uint64_t seed, double residual_tol,
                  double s_norm, std::vector<EigPair>& converged) {
  const int n = static_cast<int>(S.rows());
  Eigen::SparseLU<SpMat> lu;
  {
    SpMat shifted = S - sigma * M;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success)
      throw NumericError("shift-invert factorization failed at sigma=" + format_g17(sigma));
  }

  const int nc = static_cast<int>(converged.size());
  MatrixXd C(n, nc), MC(n, nc);
  for (int i = 0; i < nc; ++i) {
    C.col(i) = converged[i].vec;
    MC.col(i) = M * converged[i].vec;
  }

  const int m = std::min(m_steps, n);
  MatrixXd V(n, m + 1), MV(n, m + 1);
  VectorXd alpha = VectorXd::Zero(m), beta = VectorXd::Zero(m);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = unif(rng);
  if (nc > 0) v -= C * (MC.transpose() * v);
  VectorXd mv = M * v;
  double nrm = std::sqrt(v.dot(mv));
  if (!(nrm > 0)) return 0;
  V.col(0) = v / nrm;
  MV.col(0) = mv / nrm;

  int steps = 0;
  for (int j = 0; j < m; ++j) {
    VectorXd w = lu.solve(MV.col(j));
    if (j > 0) w -= beta[j - 1] * V.col(j - 1);
    alpha[j] = w.dot(MV.col(j));
    w -= alpha[j] * V.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      w -= V.leftCols(j + 1) * (MV.leftCols(j + 1).transpose() * w);
      if (nc > 0) w -= C * (MC.transpose() * w);
    }
    VectorXd mw = M * w;
    double b = std::sqrt(std::max(0.0, w.dot(mw)));
    steps = j + 1;
    if (b < 1e-13) break;  // invariant subspace exhausted
    beta[j] = b;
    V.col(j + 1) = w / b;
    MV.col(j + 1) = mw / b;
  }
  if (steps == 0) return 0;

  // Ritz extraction from the tridiagonal projection.
  MatrixXd T = MatrixXd::Zero(steps, steps);
  for (int i = 0; i < steps; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < steps) T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> tes(T);
  const VectorXd theta = tes.eigenvalues();
  const MatrixXd s = tes.eigenvectors();

  int added = 0;
  for (int i = 0; i < steps && added < want; ++i) {
    const double th = theta[i];
    if (th == 0.0) continue;
    const double lambda = sigma + 1.0 / th;
    if (lambda < lo || lambda >= hi) continue;
    VectorXd x = V.leftCols(steps) * s.col(i);
    // Clean against everything accepted so far, then M-normalize.
    for (const auto& p : converged) {
      const double c = x.dot(M * p.vec);
      x -= c * p.vec;
    }
    VectorXd mx = M * x;
    const double xn = std::sqrt(std::max(0.0, x.dot(mx)));
    if (xn < 1e-6) continue;  // numerically a duplicate of an accepted pair
    x /= xn;
    const VectorXd r = S * x - lambda * (M * x);
    if (r.norm() > residual_tol * s_norm * x.norm()) continue;
    converged.push_back({lambda, x});
    ++added;
  }
  return added;
}

void dense_in_interval(const SpMat& S, const SpMat& M, double hi, std::vector<EigPair>& out) {
  const MatrixXd Sd = MatrixXd(S);
  const MatrixXd Md = MatrixXd(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(Sd, Md,
                                                         Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success) throw NumericError("dense generalized eigensolve failed");
  const VectorXd& vals = ges.eigenvalues();
  for (int i = 0; i < vals.size(); ++i) {
    if (vals[i] < hi) out.push_back({vals[i], ges.eigenvectors().col(i)});
  }
}

// Recursive inertia-certified spectrum slicing.
void solve_slices(const SpMat& S, const SpMat& M, double lo, double hi, int count_lo,
                  int count_hi, const SolveOptions& opts, double s_norm, int depth,
                  std::vector<EigPair>& converged) {
  const int count = count_hi - count_lo;
  if (count == 0) return;
  if (depth > 40) throw NumericError("spectrum slicing failed to isolate eigenvalues");
  if (count > opts.slice_max) {
    // Bisect by inertia until slices are small enough.
    double mid = 0.5 * (lo + hi);
    int count_mid = -1;
    for (int attempt = 0; attempt < 8; ++attempt) {
      count_mid = try_inertia(S, M, mid, 1e-14);
      if (count_mid >= 0) break;
      mid += (hi - lo) * 1e-4 * (attempt + 1);
    }
    if (count_mid < 0)
      throw NumericError("inertia factorization failed near " + format_g17(mid));
    solve_slices(S, M, lo, mid, count_lo, count_mid, opts, s_norm, depth + 1, converged);
    solve_slices(S, M, mid, hi, count_mid, count_hi, opts, s_norm, depth + 1, converged);
    return;
  }

  auto in_slice = [&](double l) { return l >= lo && l < hi; };
  auto found_in_slice = [&]() {
    int k = 0;
    for (const auto& p : converged) k += in_slice(p.lambda) ? 1 : 0;
    return k;
  };

  double sigma = 0.5 * (lo + hi);
  for (int restart = 0; restart < opts.max_restarts; ++restart) {
    const int missing = count - found_in_slice();
    if (missing <= 0) return;
    const int m = std::max(2 * missing + 30, 60) + 20 * restart;
    try {
      lanczos_sweep(S, M, sigma, lo, hi, missing, m, 0x5d1ce5eedULL + 977 * restart +
                        static_cast<std::uint64_t>(depth) * 131071,
                    opts.residual_tol, s_norm, converged);
    } catch (const NumericError&) {
      sigma += (hi - lo) * 1e-3 * (restart + 1);  // shift hit an eigenvalue
    }
  }
  if (found_in_slice() < count) {
    // Slice the interval further so shifts land closer to the stragglers.
    double mid = 0.5 * (lo + hi);
    int count_mid = -1;
    for (int attempt = 0; attempt < 8; ++attempt) {
      count_mid = try_inertia(S, M, mid, 1e-14);
      if (count_mid >= 0) break;
      mid += (hi - lo) * 1e-4 * (attempt + 1);
    }
    if (count_mid < 0) throw NumericError("inertia factorization failed near " + format_g17(mid));
    solve_slices(S, M, lo, mid, count_lo, count_mid, opts, s_norm, depth + 1, converged);
    solve_slices(S, M, mid, hi, count_mid, count_hi, opts, s_norm, depth + 1, converged);
  }
}

}  // namespace

double lambda_interval_max(double l_s_min, double D0) {
  if (l_s_min <= 0) throw InputError("l_s_min must be positive");
  const double k = M_PI / l_s_min;
  return k * k * D0;
}

double length_scale(double lambda, double D0) {
  if (lambda < 0) throw InputError("lambda must be non-negative");
  if (lambda == 0) return std::numeric_limits<double>::infinity();
  return M_PI / std::sqrt(lambda / D0);
}

int inertia_below(const SpMat& S, const SpMat& M, double sigma) {
  const double scale = std::max(1e-300, std::abs(sigma));
  for (int attempt = 0; attempt < 12; ++attempt) {
    const int count = try_inertia(S, M, sigma, 1e-14);
    if (count >= 0) return count;
    sigma += scale * 1e-7 * (attempt + 1);
  }
  throw NumericError("inertia: factorization failed after shift perturbations");
}

LaplaceEig solve_interval(const fem::FemMatrices& fem, double l_s_min, const SolveOptions& opts) {
  const double lam_max = lambda_interval_max(l_s_min, fem.D0);
  const SpMat S = fem.stiffness.to_full();
  const SpMat M = fem.mass.to_full();
  const int n = static_cast<int>(S.rows());
  // Half-open interval [lo, hi) that contains [0, lam_max] with slack for
  // roundoff at both ends.
  const double hi = lam_max * (1.0 + 1e-9);
  const double lo = -lam_max * 1e-9;

  std::vector<EigPair> pairs;
  const bool dense = !opts.force_lanczos && (opts.force_dense || n <= opts.dense_threshold);
  if (dense) {
    dense_in_interval(S, M, hi, pairs);
    const int certified = inertia_below(S, M, hi);
    if (static_cast<int>(pairs.size()) != certified)
      throw NumericError("dense eigensolve count " + std::to_string(pairs.size()) +
                         " disagrees with inertia certificate " + std::to_string(certified));
  } else {
    const double s_norm = inf_norm(S);
    const int count_hi = inertia_below(S, M, hi);
    const int count_lo = inertia_below(S, M, lo);
    if (count_lo != 0)
      throw NumericError("stiffness matrix is not positive semidefinite (inertia below 0 is " +
                         std::to_string(count_lo) + ")");
    solve_slices(S, M, lo, hi, count_lo, count_hi, opts, s_norm, 0, pairs);
    if (static_cast<int>(pairs.size()) != count_hi)
      throw NumericError("eigensolver found " + std::to_string(pairs.size()) +
                         " pairs but inertia certifies " + std::to_string(count_hi));
  }

  if (pairs.empty()) throw NumericError("no eigenvalues in the requested interval");

  std::sort(pairs.begin(), pairs.end(),
            [](const EigPair& a, const EigPair& b) { return a.lambda < b.lambda; });

  const int neig = static_cast<int>(pairs.size());
  LaplaceEig out;
  out.lambdas.resize(neig);
  out.P.resize(n, neig);
  for (int i = 0; i < neig; ++i) {
    out.lambdas[i] = pairs[i].lambda;
    out.P.col(i) = pairs[i].vec;
  }

  // Twice-repeated modified Gram-Schmidt in the M-inner product. Vectors of
  // distinct eigenvalues are already M-orthogonal to residual accuracy, so
  // the projections only remove numerical drift and orthonormalize clusters.
  {
    MatrixXd MP(n, neig);
    for (int j = 0; j < neig; ++j) MP.col(j) = M * out.P.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < neig; ++j) {
        for (int i = 0; i < j; ++i) {
          const double c = out.P.col(i).dot(MP.col(j));
          out.P.col(j) -= c * out.P.col(i);
          MP.col(j) -= c * MP.col(i);
        }
        const double nrm = std::sqrt(out.P.col(j).dot(MP.col(j)));
        out.P.col(j) /= nrm;
        MP.col(j) /= nrm;
      }
    }
  }

  // Deterministic order within eigenvalue clusters: lexicographic by vector
  // entries after the sign fix.
  for (int j = 0; j < neig; ++j) {
    const double amax = out.P.col(j).cwiseAbs().maxCoeff();
    for (int i = 0; i < n; ++i) {
      if (std::abs(out.P(i, j)) > 1e-10 * amax) {
        if (out.P(i, j) < 0) out.P.col(j) = -out.P.col(j);
        break;
      }
    }
  }
  {
    int c0 = 0;
    const double floor_scale = std::max(lam_max, 1.0);
    while (c0 < neig) {
      int c1 = c0 + 1;
      while (c1 < neig && out.lambdas[c1] - out.lambdas[c0] <=
                              1e-8 * std::max({std::abs(out.lambdas[c1]), std::abs(out.lambdas[c0]),
                                               1e-12 * floor_scale}))
        ++c1;
      if (c1 - c0 > 1) {
        std::vector<int> idx(c1 - c0);
        std::iota(idx.begin(), idx.end(), c0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
          for (int i = 0; i < n; ++i) {
            if (out.P(i, a) != out.P(i, b)) return out.P(i, a) < out.P(i, b);
          }
          return false;
        });
        MatrixXd block(n, c1 - c0);
        VectorXd lam_block(c1 - c0);
        for (int k = 0; k < c1 - c0; ++k) {
          block.col(k) = out.P.col(idx[k]);
          lam_block[k] = out.lambdas[idx[k]];
        }
        out.P.middleCols(c0, c1 - c0) = block;
        out.lambdas.segment(c0, c1 - c0) = lam_block;
      }
      c0 = c1;
    }
  }

  // lambda_1 is exactly zero for a connected domain; the discrete value is
  // pure discretization noise.
  if (neig >= 2) {
    if (std::abs(out.lambdas[0]) > 1e-8 * std::abs(out.lambdas[1]))
      throw NumericError("lambda_1 = " + format_g17(out.lambdas[0]) +
                         " is not negligible against lambda_2 = " + format_g17(out.lambdas[1]));
    out.lambdas[0] = 0.0;
  } else if (std::abs(out.lambdas[0]) > 1e-12 * std::max(lam_max, 1.0)) {
    throw NumericError("single computed eigenvalue is not the zero mode");
  } else {
    out.lambdas[0] = 0.0;
  }

  out.l_s_min = l_s_min;
  out.D0 = fem.D0;
  out.mesh_fingerprint = fem.mesh_fingerprint;
  return out;
}

namespace {
constexpr char kMagic[8] = {'M', 'F', 'E', 'I', 'G', '0', '0', '1'};
}

void save_eig(const LaplaceEig& e, const std::string& path) {
  std::string buf;
  const std::uint64_t nv = static_cast<std::uint64_t>(e.P.rows());
  const std::uint64_t ne = static_cast<std::uint64_t>(e.neig());
  buf.append(kMagic, 8);
  auto put = [&buf](const void* p, std::size_t len) {
    buf.append(reinterpret_cast<const char*>(p), len);
  };
  put(&nv, 8);
  put(&ne, 8);
  put(&e.D0, 8);
  put(&e.l_s_min, 8);
  put(e.mesh_fingerprint.data(), 32);
  put(e.lambdas.data(), sizeof(double) * ne);
  put(e.P.data(), sizeof(double) * nv * ne);  // column-major
  write_file_atomic(path, buf);
}

LaplaceEig load_eig(const std::string& path, const Sha256* expect_fingerprint) {
  const std::string buf = read_file(path);
  if (buf.size() < 8 + 8 + 8 + 8 + 8 + 32) throw InputError(path + ": truncated eigen container");
  if (std::memcmp(buf.data(), kMagic, 8) != 0)
    throw InputError(path + ": bad magic (not an eigen container)");
  std::size_t off = 8;
  auto get = [&](void* p, std::size_t len) {
    if (off + len > buf.size()) throw InputError(path + ": truncated eigen container");
    std::memcpy(p, buf.data() + off, len);
    off += len;
  };
  std::uint64_t nv = 0, ne = 0;
  LaplaceEig e;
  get(&nv, 8);
  get(&ne, 8);
  get(&e.D0, 8);
  get(&e.l_s_min, 8);
  get(e.mesh_fingerprint.data(), 32);
  if (expect_fingerprint && *expect_fingerprint != e.mesh_fingerprint)
    throw InputError(path + ": mesh fingerprint mismatch");
  e.lambdas.resize(static_cast<Eigen::Index>(ne));
  e.P.resize(static_cast<Eigen::Index>(nv), static_cast<Eigen::Index>(ne));
  get(e.lambdas.data(), sizeof(double) * ne);
  get(e.P.data(), sizeof(double) * nv * ne);
  if (off != buf.size()) throw InputError(path + ": trailing bytes in eigen container");
  return e;
}

}  // namespace sdmri::eig
