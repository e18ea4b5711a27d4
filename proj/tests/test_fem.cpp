#include <Eigen/Dense>

#include "doctest.h"
#include "sdmri/fem.hpp"

using namespace sdmri;

namespace {

mesh::Mesh reference_tet() {
  mesh::Mesh m;
  m.nodes = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  m.elements = {{0, 1, 2, 3}};
  mesh::finalize_mesh(m);
  return m;
}

double entry(const fem::SparseSym& s, int r, int c) {
  if (r > c) std::swap(r, c);
  for (std::size_t i = 0; i < s.vals.size(); ++i)
    if (s.rows[i] == r && s.cols[i] == c) return s.vals[i];
  return 0;
}

}  // namespace

TEST_CASE("reference tet local matrices match exact integrals") {
  const auto m = reference_tet();
  const auto f = fem::assemble(m, 1.0);
  const double v = 1.0 / 6.0;
  // mass: diag V/10, off-diag V/20
  for (int i = 0; i < 4; ++i) CHECK(entry(f.mass, i, i) == doctest::Approx(v / 10).epsilon(1e-15));
  CHECK(entry(f.mass, 0, 2) == doctest::Approx(v / 20).epsilon(1e-15));
  // stiffness for vertex (1,0,0): D0 V |grad l|^2 with grad l = (1,0,0)
  CHECK(entry(f.stiffness, 1, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  // moment (J^x)_22 = int x l2^2 = V/20
  CHECK(entry(f.moment[0], 1, 1) == doctest::Approx(1.0 / 120.0).epsilon(1e-14));
}

TEST_CASE("mass encodes the volume and stiffness kills constants") {
  const auto m = mesh::generate_box_mesh(10, 10, 10, 3);
  const auto f = fem::assemble(m, 2.0);
  const auto M = f.mass.to_full();
  const auto S = f.stiffness.to_full();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(M.rows());
  CHECK(ones.dot(M * ones) == doctest::Approx(1000.0).epsilon(1e-12));

  double smax = 0;
  for (double v : f.stiffness.vals) smax = std::max(smax, std::abs(v));
  CHECK((S * ones).cwiseAbs().maxCoeff() <= 1e-12 * smax);
}

TEST_CASE("first moment integrates coordinates exactly on boxes") {
  const auto m = mesh::generate_box_mesh(4, 3, 5, 2, 2, 2);
  const auto f = fem::assemble(m, 1.0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.num_nodes());
  for (int axis = 0; axis < 3; ++axis) {
    const double exact = mesh::coordinate_integral(m, axis);
    const auto J = f.moment[axis].to_full();
    CHECK(ones.dot(J * ones) == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("mass matrix is positive definite on a small mesh") {
  const auto m = mesh::generate_box_mesh(2, 2, 2, 2);  // 27 nodes
  const auto f = fem::assemble(m, 1.0);
  const Eigen::MatrixXd M = Eigen::MatrixXd(f.mass.to_full());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  CHECK(es.eigenvalues().minCoeff() > 0);
}

TEST_CASE("parallel assembly is bit-identical to the serial reference") {
  const auto m = mesh::generate_box_mesh(3.3, 2.1, 1.7, 4, 3, 5);
  const auto a = fem::assemble(m, 2.0);
  const auto b = fem::assemble_serial(m, 2.0);
  CHECK(a.mass == b.mass);
  CHECK(a.stiffness == b.stiffness);
  for (int axis = 0; axis < 3; ++axis) CHECK(a.moment[axis] == b.moment[axis]);
  // and repeated assembly is deterministic
  const auto c = fem::assemble(m, 2.0);
  CHECK(a.mass == c.mass);
  CHECK(a.stiffness == c.stiffness);
}

TEST_CASE("structural symmetry and canonical storage") {
  const auto m = mesh::generate_box_mesh(1, 1, 1, 2);
  const auto f = fem::assemble(m, 1.0);
  for (std::size_t i = 0; i < f.mass.vals.size(); ++i)
    CHECK(f.mass.rows[i] <= f.mass.cols[i]);
  for (std::size_t i = 1; i < f.mass.vals.size(); ++i) {
    const bool sorted = f.mass.rows[i - 1] < f.mass.rows[i] ||
                        (f.mass.rows[i - 1] == f.mass.rows[i] &&
                         f.mass.cols[i - 1] < f.mass.cols[i]);
    CHECK(sorted);
  }
}

TEST_CASE("D0 must be positive") {
  const auto m = reference_tet();
  CHECK_THROWS_AS(fem::assemble(m, 0.0), InputError);
}
