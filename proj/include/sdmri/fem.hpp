#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "sdmri/mesh.hpp"

namespace sdmri::fem {

/// Symmetric sparse matrix in canonical form: upper triangle only,
/// coordinates sorted by (row, col), duplicates summed, explicit zeros
/// dropped. Canonical form makes assembly determinism checkable bit-for-bit.
struct SparseSym {
  int dim = 0;
  std::vector<int> rows;  // row <= col
  std::vector<int> cols;
  std::vector<double> vals;

  std::size_t nnz_upper() const { return vals.size(); }
  /// Expands to a full (both triangles) compressed matrix for solvers.
  Eigen::SparseMatrix<double> to_full() const;
  /// Coordinate text dump: "row col value" per line, 1-based, upper triangle.
  std::string to_coord_text() const;

  bool operator==(const SparseSym&) const = default;
};

/// P1 matrices on a tetrahedral mesh. mass M_jk = int phi_j phi_k (um^3),
/// stiffness S_jk = int D0 grad phi_j . grad phi_k (um^3/ms), and the three
/// first-moment matrices (J^i)_jk = int x_i phi_j phi_k (um^4).
struct FemMatrices {
  SparseSym mass;
  SparseSym stiffness;
  std::array<SparseSym, 3> moment;
  double D0 = 0;  // um^2/ms
  Sha256 mesh_fingerprint{};
};

/// Assembles all five matrices with exact barycentric integration
/// (int l1^a l2^b l3^c l4^d dV = 6V a!b!c!d!/(a+b+c+d+3)!). Element-parallel;
/// the compression step fixes the accumulation order so the result is
/// bit-identical for any thread count.
FemMatrices assemble(const mesh::Mesh& m, double D0);

/// Serial reference assembly (plain map accumulation in element order).
/// Produces bit-identical matrices; kept for tests and benchmarks.
FemMatrices assemble_serial(const mesh::Mesh& m, double D0);

}  // namespace sdmri::fem
