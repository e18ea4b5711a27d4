// Timing comparison of the serial reference kernels against the OpenMP
// versions, plus the per-signal cost of the reduced model versus the PDE
// reference solver.
#include <chrono>
#include <cstdio>

#include "sdmri/btpde.hpp"
#include "sdmri/eig.hpp"
#include "sdmri/fem.hpp"
#include "sdmri/mesh.hpp"
#include "sdmri/mf.hpp"

namespace {

using clk = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps = 3) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clk::now();
    fn();
    const auto t1 = clk::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

}  // namespace

int main() {
  using namespace sdmri;

  const mesh::Mesh box = mesh::generate_box_mesh(20, 20, 20, 24, 24, 24);
  std::printf("mesh: %d nodes, %d elements\n", box.num_nodes(), box.num_elements());

  const double t_asm_serial = time_ms([&] { fem::assemble_serial(box, 2.0); });
  const double t_asm_par = time_ms([&] { fem::assemble(box, 2.0); });
  std::printf("assemble      serial %8.1f ms   openmp %8.1f ms   speedup %.2fx\n", t_asm_serial,
              t_asm_par, t_asm_serial / t_asm_par);

  const double t_vol_serial = time_ms([&] { mesh::volume_serial(box); }, 10);
  const double t_vol_par = time_ms([&] { mesh::volume(box); }, 10);
  std::printf("volume        serial %8.3f ms   openmp %8.3f ms   speedup %.2fx\n", t_vol_serial,
              t_vol_par, t_vol_serial / t_vol_par);

  // Per-signal timing on a slab: reduced model vs PDE reference.
  const mesh::Mesh slab = mesh::generate_box_mesh(20, 2, 2, 40, 4, 4);
  const fem::FemMatrices fm = fem::assemble(slab, 2.0);
  const eig::LaplaceEig ed = eig::solve_interval(fm, 1.5);
  const mf::MFModel model = mf::build_model(ed, fm, 1.0);
  const seq::Pgse sq(10.6, 13.0, "seq1");
  const seq::Gradient g({1, 0, 0}, seq::amplitude_for_b(sq, 1000));
  std::printf("slab: %d nodes, %d modes\n", slab.num_nodes(), model.neig());

  const double t_mf = time_ms([&] { mf::mf_signal(model, g, sq); }, 5);
  const double t_btpde =
      time_ms([&] { btpde::btpde_signal(fm, g, sq, btpde::BtpdeOptions{}, 1.0); }, 1);
  std::printf("signal        mf     %8.2f ms   btpde  %8.1f ms   ratio %.1fx\n", t_mf, t_btpde,
              t_btpde / t_mf);
  return 0;
}
