#include "sdmri/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>

namespace sdmri::mesh {

namespace {

constexpr double kDegenerateVolume = 1e-12;  // um^3

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Union-find over node indices.
struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[b] = a;
  }
};

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
  throw InputError(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const Vec3 u = sub(b, a), v = sub(c, a), w = sub(d, a);
  return dot(u, cross(v, w)) / 6.0;
}

Mesh load_mesh(const std::string& node_path, const std::string& ele_path, LoadReport* report) {
  Mesh m;
  LoadReport local;
  if (!report) report = &local;

  {
    std::istringstream in(read_file(node_path));
    std::string line;
    int lineno = 0;
    long nv = -1, dim = 0, nattr = 0, nmark = 0;
    long seen = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      if (nv < 0) {
        if (!(ls >> nv >> dim)) {
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          parse_fail(node_path, lineno, "expected header 'N_v 3 0 0'");
        }
        ls >> nattr >> nmark;
        if (dim != 3) parse_fail(node_path, lineno, "only 3-D node files are supported");
        if (nv <= 0) parse_fail(node_path, lineno, "node count must be positive");
        if (nattr > 0 || nmark > 0) report->markers_discarded = true;
        m.nodes.resize(static_cast<std::size_t>(nv));
        continue;
      }
      long idx;
      double x, y, z;
      if (!(ls >> idx)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        parse_fail(node_path, lineno, "expected 'index x y z'");
      }
      if (!(ls >> x >> y >> z)) parse_fail(node_path, lineno, "expected three coordinates");
      if (idx < 1 || idx > nv) parse_fail(node_path, lineno, "node index out of range");
      m.nodes[static_cast<std::size_t>(idx - 1)] = {x, y, z};
      ++seen;
    }
    if (nv < 0) throw InputError(node_path + ": empty node file");
    if (seen != nv)
      throw InputError(node_path + ": header announces " + std::to_string(nv) + " nodes, found " +
                       std::to_string(seen));
  }

  {
    std::istringstream in(read_file(ele_path));
    std::string line;
    int lineno = 0;
    long ne = -1, npe = 0, nattr = 0;
    long seen = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      if (ne < 0) {
        if (!(ls >> ne >> npe)) {
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          parse_fail(ele_path, lineno, "expected header 'N_e 4 0'");
        }
        ls >> nattr;
        if (npe != 4) parse_fail(ele_path, lineno, "only linear tetrahedra (4 nodes) are supported");
        if (ne <= 0) parse_fail(ele_path, lineno, "element count must be positive");
        if (nattr > 0) report->markers_discarded = true;
        m.elements.resize(static_cast<std::size_t>(ne));
        continue;
      }
      long idx, v1, v2, v3, v4;
      if (!(ls >> idx)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        parse_fail(ele_path, lineno, "expected 'index v1 v2 v3 v4'");
      }
      if (!(ls >> v1 >> v2 >> v3 >> v4)) parse_fail(ele_path, lineno, "expected four node indices");
      if (idx < 1 || idx > ne) parse_fail(ele_path, lineno, "element index out of range");
      for (long v : {v1, v2, v3, v4})
        if (v < 1 || v > static_cast<long>(m.nodes.size()))
          parse_fail(ele_path, lineno, "node index " + std::to_string(v) + " out of range [1," +
                                           std::to_string(m.nodes.size()) + "]");
      m.elements[static_cast<std::size_t>(idx - 1)] = {static_cast<int>(v1 - 1),
                                                       static_cast<int>(v2 - 1),
                                                       static_cast<int>(v3 - 1),
                                                       static_cast<int>(v4 - 1)};
      ++seen;
    }
    if (ne < 0) throw InputError(ele_path + ": empty element file");
    if (seen != ne)
      throw InputError(ele_path + ": header announces " + std::to_string(ne) +
                       " elements, found " + std::to_string(seen));
  }

  finalize_mesh(m, report);
  return m;
}

void finalize_mesh(Mesh& m, LoadReport* report) {
  LoadReport local;
  if (!report) report = &local;
  const int nv = m.num_nodes();
  if (nv == 0 || m.elements.empty()) throw InputError("mesh has no nodes or no elements");

  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    auto& el = m.elements[e];
    for (int v : el)
      if (v < 0 || v >= nv)
        throw InputError("element " + std::to_string(e + 1) + ": node index out of range");
    double vol = signed_volume(m.nodes[el[0]], m.nodes[el[1]], m.nodes[el[2]], m.nodes[el[3]]);
    if (vol < 0) {
      std::swap(el[1], el[2]);
      vol = -vol;
      ++report->orientation_fixes;
    }
    if (vol < kDegenerateVolume)
      throw InputError("element " + std::to_string(e + 1) + " is degenerate (volume " +
                       format_g17(vol) + " um^3)");
  }

  // Boundary extraction: a face incident to exactly one element is boundary.
  // Faces of the (positively oriented) tet (v0,v1,v2,v3) with outward-pointing
  // normals are (1,2,3), (0,3,2), (0,1,3), (0,2,1).
  static const int face_table[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
  std::map<std::array<int, 3>, std::pair<int, std::array<int, 3>>> faces;  // sorted -> (count, oriented)
  for (const auto& el : m.elements) {
    for (const auto& f : face_table) {
      std::array<int, 3> oriented = {el[f[0]], el[f[1]], el[f[2]]};
      std::array<int, 3> key = oriented;
      std::sort(key.begin(), key.end());
      auto [it, inserted] = faces.try_emplace(key, std::pair{0, oriented});
      it->second.first += 1;
      if (it->second.first > 2)
        throw InputError("non-manifold mesh: a face is shared by more than two elements");
    }
  }
  m.boundary_faces.clear();
  for (const auto& [key, val] : faces)
    if (val.first == 1) m.boundary_faces.push_back(val.second);

  // Edge connectivity: the domain must be a single connected component.
  DisjointSet ds(nv);
  std::vector<bool> used(nv, false);
  for (const auto& el : m.elements) {
    for (int v : el) used[v] = true;
    ds.unite(el[0], el[1]);
    ds.unite(el[0], el[2]);
    ds.unite(el[0], el[3]);
  }
  int root = -1;
  for (int i = 0; i < nv; ++i) {
    if (!used[i]) {
      report->dangling_nodes.push_back(i);
      continue;
    }
    if (root < 0)
      root = ds.find(i);
    else if (ds.find(i) != root)
      throw InputError("disconnected mesh: more than one edge-connected component");
  }
}

Mesh generate_box_mesh(double lx, double ly, double lz, int nx, int ny, int nz) {
  if (lx <= 0 || ly <= 0 || lz <= 0) throw InputError("box extents must be positive");
  if (nx < 1 || ny < 1 || nz < 1) throw InputError("cell counts must be >= 1");
  const std::int64_t nnodes =
      static_cast<std::int64_t>(nx + 1) * (ny + 1) * (nz + 1);
  if (nnodes > (1u << 30)) throw InputError("box mesh too large");

  Mesh m;
  m.nodes.reserve(static_cast<std::size_t>(nnodes));
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        m.nodes.push_back({lx * i / nx, ly * j / ny, lz * k / nz});

  auto node_id = [&](int i, int j, int k) { return i + (nx + 1) * (j + (ny + 1) * k); };

  // Six tetrahedra per cell, one per permutation of the axis step order from
  // corner (0,0,0) to corner (1,1,1). Translation-invariant, hence conforming
  // across cell boundaries.
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  m.elements.reserve(static_cast<std::size_t>(nx) * ny * nz * 6);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (const auto& p : perms) {
          std::array<int, 3> at = {i, j, k};
          std::array<int, 4> tet;
          tet[0] = node_id(at[0], at[1], at[2]);
          for (int s = 0; s < 3; ++s) {
            at[p[s]] += 1;
            tet[s + 1] = node_id(at[0], at[1], at[2]);
          }
          m.elements.push_back(tet);
        }

  finalize_mesh(m);
  return m;
}

Mesh generate_box_mesh(double lx, double ly, double lz, int n_per_axis) {
  return generate_box_mesh(lx, ly, lz, n_per_axis, n_per_axis, n_per_axis);
}

namespace {

std::vector<double> element_volumes(const Mesh& m) {
  std::vector<double> vols(m.elements.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t e = 0; e < static_cast<std::int64_t>(m.elements.size()); ++e) {
    const auto& el = m.elements[e];
    vols[e] = signed_volume(m.nodes[el[0]], m.nodes[el[1]], m.nodes[el[2]], m.nodes[el[3]]);
  }
  return vols;
}

std::vector<double> face_area_terms(const Mesh& m, const Vec3* u_g) {
  std::vector<double> terms(m.boundary_faces.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t f = 0; f < static_cast<std::int64_t>(m.boundary_faces.size()); ++f) {
    const auto& bf = m.boundary_faces[f];
    const Vec3 n2 = cross(sub(m.nodes[bf[1]], m.nodes[bf[0]]), sub(m.nodes[bf[2]], m.nodes[bf[0]]));
    const double two_area = norm(n2);
    if (u_g && two_area > 0) {
      const double c = dot(*u_g, n2) / two_area;
      terms[f] = 0.5 * two_area * c * c;
    } else {
      terms[f] = 0.5 * two_area;
    }
  }
  return terms;
}

void check_unit(const Vec3& u) {
  if (std::abs(norm(u) - 1.0) > 1e-12)
    throw InputError("direction must be a unit vector (|u| = " + format_g17(norm(u)) + ")");
}

}  // namespace

double volume(const Mesh& m) {
  auto vols = element_volumes(m);
  return pairwise_sum(vols);
}

double volume_serial(const Mesh& m) {
  std::vector<double> vols(m.elements.size());
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const auto& el = m.elements[e];
    vols[e] = signed_volume(m.nodes[el[0]], m.nodes[el[1]], m.nodes[el[2]], m.nodes[el[3]]);
  }
  return pairwise_sum(vols);
}

double surface_area(const Mesh& m) {
  auto terms = face_area_terms(m, nullptr);
  return pairwise_sum(terms);
}

double directional_area(const Mesh& m, const Vec3& u_g) {
  check_unit(u_g);
  auto terms = face_area_terms(m, &u_g);
  return pairwise_sum(terms);
}

double directional_area_serial(const Mesh& m, const Vec3& u_g) {
  check_unit(u_g);
  std::vector<double> terms(m.boundary_faces.size());
  for (std::size_t f = 0; f < m.boundary_faces.size(); ++f) {
    const auto& bf = m.boundary_faces[f];
    const Vec3 n2 = cross(sub(m.nodes[bf[1]], m.nodes[bf[0]]), sub(m.nodes[bf[2]], m.nodes[bf[0]]));
    const double two_area = norm(n2);
    const double c = two_area > 0 ? dot(u_g, n2) / two_area : 0.0;
    terms[f] = 0.5 * two_area * c * c;
  }
  return pairwise_sum(terms);
}

double coordinate_integral(const Mesh& m, int axis) {
  std::vector<double> terms(m.elements.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t e = 0; e < static_cast<std::int64_t>(m.elements.size()); ++e) {
    const auto& el = m.elements[e];
    const double vol =
        signed_volume(m.nodes[el[0]], m.nodes[el[1]], m.nodes[el[2]], m.nodes[el[3]]);
    const double c = (m.nodes[el[0]][axis] + m.nodes[el[1]][axis] + m.nodes[el[2]][axis] +
                      m.nodes[el[3]][axis]) /
                     4.0;
    terms[e] = vol * c;
  }
  return pairwise_sum(terms);
}

double coordinate_square_integral(const Mesh& m, int axis) {
  // For a linear function with vertex values x_a on a tet of volume V,
  // int (sum x_a l_a)^2 = V/20 * ((sum x_a)^2 + sum x_a^2).
  std::vector<double> terms(m.elements.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t e = 0; e < static_cast<std::int64_t>(m.elements.size()); ++e) {
    const auto& el = m.elements[e];
    const double vol =
        signed_volume(m.nodes[el[0]], m.nodes[el[1]], m.nodes[el[2]], m.nodes[el[3]]);
    double s = 0, s2 = 0;
    for (int v : el) {
      const double x = m.nodes[v][axis];
      s += x;
      s2 += x * x;
    }
    terms[e] = vol / 20.0 * (s * s + s2);
  }
  return pairwise_sum(terms);
}

Vec3 centroid(const Mesh& m) {
  const double v = volume(m);
  return {coordinate_integral(m, 0) / v, coordinate_integral(m, 1) / v,
          coordinate_integral(m, 2) / v};
}

std::string to_node_text(const Mesh& m) {
  std::string out = std::to_string(m.nodes.size()) + " 3 0 0\n";
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    out += std::to_string(i + 1);
    for (double c : m.nodes[i]) {
      out += ' ';
      out += format_g17(c);
    }
    out += '\n';
  }
  return out;
}

std::string to_ele_text(const Mesh& m) {
  std::string out = std::to_string(m.elements.size()) + " 4 0\n";
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    out += std::to_string(e + 1);
    for (int v : m.elements[e]) {
      out += ' ';
      out += std::to_string(v + 1);
    }
    out += '\n';
  }
  return out;
}

void save_mesh(const Mesh& m, const std::string& node_path, const std::string& ele_path) {
  write_file_atomic(node_path, to_node_text(m));
  write_file_atomic(ele_path, to_ele_text(m));
}

Sha256 fingerprint(const Mesh& m) { return sha256_string(to_node_text(m) + to_ele_text(m)); }

}  // namespace sdmri::mesh
