#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "sdmri/mesh.hpp"

using namespace sdmri;
using mesh::Mesh;
using mesh::Vec3;

namespace {

Mesh single_tet() {
  Mesh m;
  m.nodes = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  m.elements = {{0, 1, 2, 3}};
  mesh::finalize_mesh(m);
  return m;
}

std::string temp_dir() {
  auto d = std::filesystem::temp_directory_path() / "sdmri_mesh_test";
  std::filesystem::create_directories(d);
  return d.string();
}

}  // namespace

TEST_CASE("single tetrahedron: volume, boundary, orientation") {
  const Mesh m = single_tet();
  CHECK(m.num_elements() == 1);
  CHECK(m.boundary_faces.size() == 4);
  CHECK(mesh::volume(m) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("orientation fix flips negative elements") {
  Mesh m;
  m.nodes = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  m.elements = {{0, 2, 1, 3}};  // negative signed volume
  mesh::LoadReport rep;
  mesh::finalize_mesh(m, &rep);
  CHECK(rep.orientation_fixes == 1);
  CHECK(mesh::volume(m) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("degenerate element is rejected") {
  Mesh m;
  m.nodes = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1e-14, 1e-14, 0}};
  m.elements = {{0, 1, 2, 3}};
  CHECK_THROWS_AS(mesh::finalize_mesh(m), InputError);
}

TEST_CASE("two tets sharing nothing is disconnected") {
  Mesh m;
  m.nodes = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
             {10, 10, 10}, {11, 10, 10}, {10, 11, 10}, {10, 10, 11}};
  m.elements = {{0, 1, 2, 3}, {4, 5, 6, 7}};
  CHECK_THROWS_AS(mesh::finalize_mesh(m), InputError);
}

TEST_CASE("box mesh tiles the box exactly") {
  const Mesh unit = mesh::generate_box_mesh(1, 1, 1, 1);
  CHECK(unit.num_nodes() == 8);
  CHECK(unit.num_elements() == 6);
  CHECK(mesh::volume(unit) == doctest::Approx(1.0).epsilon(1e-14));

  for (int n = 1; n <= 8; ++n) {
    const Mesh b = mesh::generate_box_mesh(10, 10, 10, n);
    CHECK(mesh::volume(b) == doctest::Approx(1000.0).epsilon(1e-12));
  }

  const Mesh b2 = mesh::generate_box_mesh(2, 1, 1, 2, 2, 2);
  double lo[3] = {1e9, 1e9, 1e9}, hi[3] = {-1e9, -1e9, -1e9};
  for (const auto& p : b2.nodes)
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min(lo[c], p[c]);
      hi[c] = std::max(hi[c], p[c]);
    }
  CHECK(lo[0] == 0.0);
  CHECK(hi[0] == 2.0);
  CHECK(hi[1] == 1.0);
  CHECK(hi[2] == 1.0);
}

TEST_CASE("directional areas of a box") {
  const Mesh b = mesh::generate_box_mesh(10, 10, 10, 4);
  CHECK(mesh::surface_area(b) == doctest::Approx(600.0).epsilon(1e-12));
  CHECK(mesh::directional_area(b, {1, 0, 0}) == doctest::Approx(200.0).epsilon(1e-12));
  CHECK_THROWS_AS(mesh::directional_area(b, {1, 1, 0}), InputError);
}

TEST_CASE("orthonormal triad directional areas sum to the surface area") {
  const Mesh b = mesh::generate_box_mesh(3, 2, 1, 3, 2, 2);
  const double s = std::sqrt(0.5);
  const Vec3 u = {s, s, 0}, v = {-s, s, 0}, w = {0, 0, 1};
  const double sum = mesh::directional_area(b, u) + mesh::directional_area(b, v) +
                     mesh::directional_area(b, w);
  CHECK(sum == doctest::Approx(mesh::surface_area(b)).epsilon(1e-12));
}

TEST_CASE("closed boundary: area-weighted normals cancel") {
  const Mesh b = mesh::generate_box_mesh(4, 3, 2, 3, 3, 3);
  double acc[3] = {0, 0, 0};
  for (const auto& f : b.boundary_faces) {
    const auto &p0 = b.nodes[f[0]], &p1 = b.nodes[f[1]], &p2 = b.nodes[f[2]];
    const double e1[3] = {p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]};
    const double e2[3] = {p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2]};
    acc[0] += 0.5 * (e1[1] * e2[2] - e1[2] * e2[1]);
    acc[1] += 0.5 * (e1[2] * e2[0] - e1[0] * e2[2]);
    acc[2] += 0.5 * (e1[0] * e2[1] - e1[1] * e2[0]);
  }
  const double area = mesh::surface_area(b);
  for (double c : acc) CHECK(std::abs(c) <= 1e-9 * area);
}

TEST_CASE("sphere-like mesh: directional area approaches surface/3") {
  // A box is crude, but the identity sum over any triad = surface holds;
  // use an octahedron-ish refinement of the cube for a rounder shape.
  const Mesh b = mesh::generate_box_mesh(5, 5, 5, 6);
  const double s3 = 1.0 / std::sqrt(3.0);
  const double a = mesh::directional_area(b, {s3, s3, s3});
  // Cube with diagonal direction: every face contributes (1/3) area.
  CHECK(a == doctest::Approx(mesh::surface_area(b) / 3.0).epsilon(1e-12));
}

TEST_CASE("node/ele round trip is bit exact") {
  const Mesh b = mesh::generate_box_mesh(1.7, 2.9, 0.37, 2, 3, 1);
  const auto dir = temp_dir();
  mesh::save_mesh(b, dir + "/m.node", dir + "/m.ele");
  const Mesh r = mesh::load_mesh(dir + "/m.node", dir + "/m.ele");
  REQUIRE(r.num_nodes() == b.num_nodes());
  for (int i = 0; i < b.num_nodes(); ++i)
    for (int c = 0; c < 3; ++c) CHECK(r.nodes[i][c] == b.nodes[i][c]);
  CHECK(mesh::fingerprint(r) == mesh::fingerprint(b));
}

TEST_CASE("loader rejects out-of-range node indices") {
  const auto dir = temp_dir();
  write_file_atomic(dir + "/bad.node", "4 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n");
  write_file_atomic(dir + "/bad.ele", "1 4 0\n1 1 2 3 5\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(mesh::load_mesh(dir + "/bad.node", dir + "/bad.ele")),
                       doctest::Contains("out of range"), InputError);
}

TEST_CASE("loader reports parse errors with line numbers") {
  const auto dir = temp_dir();
  write_file_atomic(dir + "/bad2.node", "2 3 0 0\n1 0 0 zero\n2 1 0 0\n");
  write_file_atomic(dir + "/bad2.ele", "1 4 0\n1 1 2 1 2\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(mesh::load_mesh(dir + "/bad2.node", dir + "/bad2.ele")),
                       doctest::Contains(":2:"), InputError);
}

TEST_CASE("dangling node is kept and reported") {
  const auto dir = temp_dir();
  write_file_atomic(dir + "/d.node",
                    "5 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n5 9 9 9\n");
  write_file_atomic(dir + "/d.ele", "1 4 0\n1 1 2 3 4\n");
  mesh::LoadReport rep;
  const Mesh m = mesh::load_mesh(dir + "/d.node", dir + "/d.ele", &rep);
  CHECK(m.num_nodes() == 5);
  REQUIRE(rep.dangling_nodes.size() == 1);
  CHECK(rep.dangling_nodes[0] == 4);
}

TEST_CASE("serial and parallel reductions agree bitwise") {
  const Mesh b = mesh::generate_box_mesh(7, 3, 2, 5, 4, 3);
  CHECK(mesh::volume(b) == mesh::volume_serial(b));
  const Vec3 u = {0, 0, 1};
  CHECK(mesh::directional_area(b, u) == mesh::directional_area_serial(b, u));
}

TEST_CASE("coordinate integrals on a box are exact") {
  const Mesh b = mesh::generate_box_mesh(4, 2, 6, 3, 2, 4);
  // int x over box = Lx^2/2 * Ly * Lz
  CHECK(mesh::coordinate_integral(b, 0) == doctest::Approx(4.0 * 4 / 2 * 2 * 6).epsilon(1e-13));
  // int x^2 = Lx^3/3 * Ly * Lz
  CHECK(mesh::coordinate_square_integral(b, 0) ==
        doctest::Approx(64.0 / 3 * 12).epsilon(1e-13));
  const auto c = mesh::centroid(b);
  CHECK(c[0] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(c[1] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(c[2] == doctest::Approx(3.0).epsilon(1e-13));
}
