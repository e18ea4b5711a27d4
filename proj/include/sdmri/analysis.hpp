#pragma once

#include <vector>

#include "sdmri/mesh.hpp"
#include "sdmri/mf.hpp"
#include "sdmri/seq.hpp"

namespace sdmri::analysis {

/// Matched per-direction signal records for two methods over one (seq, b).
struct DirectionSweep {
  std::vector<seq::Vec3> directions;
  std::vector<mf::SignalRecord> test;       // e.g. MF
  std::vector<mf::SignalRecord> reference;  // e.g. BTPDE
};

/// E = sum |S_test - S_ref|^2 / sum |S_ref|^2, on complex signals.
/// Report x100 for percent.
double signal_difference(const DirectionSweep& sweep);

/// E^{RM,i} for every removable mode i = 1..N_eig-1 (0-based; the constant
/// mode is never removed). Entry k corresponds to mode k+1. Each removed-mode
/// sweep is an independent evaluation; they run in a parallel map.
std::vector<double> remove_one_significance(const mf::MFModel& model,
                                            const std::vector<seq::Vec3>& dirs,
                                            const seq::Pgse& s, double b_s_mm2,
                                            int threads = 0);

/// RGB direction color of an eigenmode: componentwise |a_1n|, normalized.
/// Returns false (undirected) for the zero vector, emitting (0,0,0).
bool rgb_direction(const seq::Vec3& a1n, seq::Vec3& rgb);

/// Finite-pulse correction factor
/// C = (4/35) [(D+d)^{7/2} + (D-d)^{7/2} - 2(d^{7/2} + D^{7/2})] / (d^2 (D - d/3)).
double c_delta_Delta(double delta_ms, double Delta_ms);

/// Short-time ADC approximation
/// D0 [1 - 4 sqrt(D0) / (3 sqrt(pi)) C_{d,D} A_ug / V].
double sta_adc(const mesh::Mesh& m, double D0, const seq::Pgse& s, const seq::Vec3& u_g);

/// Two-point ADC from signal magnitudes, -log(Sb/S0)/b, in um^2/ms.
double adc_from_signals(double s0, double sb, double b_s_mm2);

}  // namespace sdmri::analysis
