#include "sdmri/fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace sdmri::fem {

namespace {

using mesh::Vec3;

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Local index pairs (a <= b) in fixed order.
constexpr int kPairs[10][2] = {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1},
                               {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}};

// 5 matrices x 10 upper-triangle values per element, fixed slot layout.
struct LocalBlock {
  double mass[10];
  double stiff[10];
  double mom[3][10];
};

LocalBlock element_block(const mesh::Mesh& m, std::size_t e, double D0) {
  const auto& el = m.elements[e];
  const Vec3& q0 = m.nodes[el[0]];
  const Vec3 e1 = sub(m.nodes[el[1]], q0);
  const Vec3 e2 = sub(m.nodes[el[2]], q0);
  const Vec3 e3 = sub(m.nodes[el[3]], q0);
  const double six_v = dot(e1, cross(e2, e3));
  const double vol = six_v / 6.0;

  // Barycentric gradients: grad l_i constant per element.
  Vec3 g[4];
  g[1] = cross(e2, e3);
  g[2] = cross(e3, e1);
  g[3] = cross(e1, e2);
  for (int i = 1; i <= 3; ++i)
    for (int c = 0; c < 3; ++c) g[i][c] /= six_v;
  g[0] = {-g[1][0] - g[2][0] - g[3][0], -g[1][1] - g[2][1] - g[3][1],
          -g[1][2] - g[2][2] - g[3][2]};

  LocalBlock blk;
  for (int t = 0; t < 10; ++t) {
    const int a = kPairs[t][0], b = kPairs[t][1];
    blk.mass[t] = (a == b) ? vol / 10.0 : vol / 20.0;
    blk.stiff[t] = D0 * vol * dot(g[a], g[b]);
    // int x_i l_a l_b = sum_v x_v^i int l_v l_a l_b with the exact
    // triple-product weights V/20, V/60, V/120 by index multiplicity.
    for (int axis = 0; axis < 3; ++axis) {
      double s = 0;
      for (int v = 0; v < 4; ++v) {
        double w;
        if (v == a && v == b)
          w = vol / 20.0;
        else if (v == a || v == b || a == b)
          w = vol / 60.0;
        else
          w = vol / 120.0;
        s += m.nodes[el[v]][axis] * w;
      }
      blk.mom[axis][t] = s;
    }
  }
  return blk;
}

void compress(int dim, std::vector<int>& rows, std::vector<int>& cols,
              std::vector<std::vector<double>*> value_sets, std::vector<SparseSym*> outputs) {
  const std::size_t n = rows.size();
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  std::sort(perm.begin(), perm.end(), [&](std::uint32_t x, std::uint32_t y) {
    if (rows[x] != rows[y]) return rows[x] < rows[y];
    if (cols[x] != cols[y]) return cols[x] < cols[y];
    return x < y;  // equal coordinates sum in element order
  });
  for (std::size_t s = 0; s < value_sets.size(); ++s) {
    SparseSym& out = *outputs[s];
    out.dim = dim;
    out.rows.clear();
    out.cols.clear();
    out.vals.clear();
    const std::vector<double>& v = *value_sets[s];
    std::size_t i = 0;
    while (i < n) {
      const int r = rows[perm[i]], c = cols[perm[i]];
      double acc = 0;
      std::size_t j = i;
      while (j < n && rows[perm[j]] == r && cols[perm[j]] == c) acc += v[perm[j]], ++j;
      if (acc != 0.0) {
        out.rows.push_back(r);
        out.cols.push_back(c);
        out.vals.push_back(acc);
      }
      i = j;
    }
  }
}

}  // namespace

Eigen::SparseMatrix<double> SparseSym::to_full() const {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    trips.emplace_back(rows[i], cols[i], vals[i]);
    if (rows[i] != cols[i]) trips.emplace_back(cols[i], rows[i], vals[i]);
  }
  Eigen::SparseMatrix<double> out(dim, dim);
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

std::string SparseSym::to_coord_text() const {
  std::string out;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    out += std::to_string(rows[i] + 1);
    out += ' ';
    out += std::to_string(cols[i] + 1);
    out += ' ';
    out += format_g17(vals[i]);
    out += '\n';
  }
  return out;
}

FemMatrices assemble(const mesh::Mesh& m, double D0) {
  if (D0 <= 0) throw InputError("D0 must be positive");
  const std::size_t ne = m.elements.size();
  std::vector<int> rows(ne * 10), cols(ne * 10);
  std::vector<double> vm(ne * 10), vs(ne * 10), vx(ne * 10), vy(ne * 10), vz(ne * 10);

#pragma omp parallel for schedule(static)
  for (std::int64_t e = 0; e < static_cast<std::int64_t>(ne); ++e) {
    const LocalBlock blk = element_block(m, static_cast<std::size_t>(e), D0);
    const auto& el = m.elements[e];
    for (int t = 0; t < 10; ++t) {
      int i = el[kPairs[t][0]], j = el[kPairs[t][1]];
      if (i > j) std::swap(i, j);
      const std::size_t slot = static_cast<std::size_t>(e) * 10 + t;
      rows[slot] = i;
      cols[slot] = j;
      vm[slot] = blk.mass[t];
      vs[slot] = blk.stiff[t];
      vx[slot] = blk.mom[0][t];
      vy[slot] = blk.mom[1][t];
      vz[slot] = blk.mom[2][t];
    }
  }

  FemMatrices out;
  out.D0 = D0;
  out.mesh_fingerprint = mesh::fingerprint(m);
  compress(m.num_nodes(), rows, cols, {&vm, &vs, &vx, &vy, &vz},
           {&out.mass, &out.stiffness, &out.moment[0], &out.moment[1], &out.moment[2]});
  return out;
}

FemMatrices assemble_serial(const mesh::Mesh& m, double D0) {
  if (D0 <= 0) throw InputError("D0 must be positive");
  std::array<std::map<std::pair<int, int>, double>, 5> acc;
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const LocalBlock blk = element_block(m, e, D0);
    const auto& el = m.elements[e];
    for (int t = 0; t < 10; ++t) {
      int i = el[kPairs[t][0]], j = el[kPairs[t][1]];
      if (i > j) std::swap(i, j);
      const std::pair<int, int> key{i, j};
      acc[0][key] += blk.mass[t];
      acc[1][key] += blk.stiff[t];
      acc[2][key] += blk.mom[0][t];
      acc[3][key] += blk.mom[1][t];
      acc[4][key] += blk.mom[2][t];
    }
  }
  FemMatrices out;
  out.D0 = D0;
  out.mesh_fingerprint = mesh::fingerprint(m);
  SparseSym* mats[5] = {&out.mass, &out.stiffness, &out.moment[0], &out.moment[1],
                        &out.moment[2]};
  for (int s = 0; s < 5; ++s) {
    mats[s]->dim = m.num_nodes();
    for (const auto& [key, val] : acc[s]) {
      if (val == 0.0) continue;
      mats[s]->rows.push_back(key.first);
      mats[s]->cols.push_back(key.second);
      mats[s]->vals.push_back(val);
    }
  }
  return out;
}

}  // namespace sdmri::fem
