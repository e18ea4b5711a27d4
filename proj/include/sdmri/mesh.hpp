#pragma once

#include <array>
#include <string>
#include <vector>

#include "sdmri/util.hpp"

namespace sdmri::mesh {

using Vec3 = std::array<double, 3>;

/// A tetrahedral P1 mesh. Lengths are in micrometers. Immutable after
/// construction/validation; safe to share across threads read-only.
struct Mesh {
  std::vector<Vec3> nodes;                       // um
  std::vector<std::array<int, 4>> elements;      // 0-based node indices
  std::vector<std::array<int, 3>> boundary_faces;  // oriented so the normal points outward
  std::string unit_scale = "um";

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }
};

/// Diagnostics collected while validating an externally produced mesh.
struct LoadReport {
  int orientation_fixes = 0;
  std::vector<int> dangling_nodes;  // referenced by no element; retained
  bool markers_discarded = false;   // extra per-node/element columns ignored
};

// Signed volume of the tetrahedron (a,b,c,d); positive for right-handed
// ordering.
double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// Parses a TetGen-style .node/.ele pair, fixes element orientation, extracts
/// the watertight boundary and verifies edge-connectivity.
Mesh load_mesh(const std::string& node_path, const std::string& ele_path,
               LoadReport* report = nullptr);

/// Validates an in-memory mesh (same checks as load_mesh) and fills in the
/// boundary faces. Throws InputError on violations.
void finalize_mesh(Mesh& m, LoadReport* report = nullptr);

/// Structured mesh of [0,Lx]x[0,Ly]x[0,Lz]; every grid cell is split into six
/// tetrahedra around the cell diagonal, which tiles the box exactly and is
/// face-conforming between neighboring cells.
Mesh generate_box_mesh(double lx, double ly, double lz, int nx, int ny, int nz);
Mesh generate_box_mesh(double lx, double ly, double lz, int n_per_axis);

double volume(const Mesh& m);
double surface_area(const Mesh& m);
/// Integral over the boundary of (u_g . n)^2; u_g must be unit to 1e-12.
double directional_area(const Mesh& m, const Vec3& u_g);

/// Integral over the domain of the coordinate x_axis (axis in {0,1,2}).
double coordinate_integral(const Mesh& m, int axis);
/// Integral over the domain of x_axis^2.
double coordinate_square_integral(const Mesh& m, int axis);

Vec3 centroid(const Mesh& m);

/// Canonical text serialization (17-significant-digit floats, LF endings,
/// 1-based indices). load_mesh(save) round-trips coordinates bit-exactly.
std::string to_node_text(const Mesh& m);
std::string to_ele_text(const Mesh& m);
void save_mesh(const Mesh& m, const std::string& node_path, const std::string& ele_path);

/// SHA-256 of the canonical node text followed by the canonical element text.
Sha256 fingerprint(const Mesh& m);

// Serial reference reductions, kept for tests/benchmarks against the
// OpenMP versions above.
double volume_serial(const Mesh& m);
double directional_area_serial(const Mesh& m, const Vec3& u_g);

}  // namespace sdmri::mesh
