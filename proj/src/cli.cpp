#include "sdmri/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace sdmri::cli {

namespace {

using nlohmann::json;

double now_ms() {
  using clk = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clk::now().time_since_epoch()).count();
}

[[noreturn]] void config_fail(const std::string& field, const std::string& what) {
  throw InputError("config field '" + field + "': " + what);
}

template <typename T>
T get_required(const json& j, const std::string& field) {
  if (!j.contains(field)) config_fail(field, "missing");
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    config_fail(field, e.what());
  }
}

template <typename T>
T get_or(const json& j, const std::string& field, T fallback) {
  if (!j.contains(field)) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    config_fail(field, e.what());
  }
}

const std::set<std::string> kMethods = {"mf", "mfga", "btpde", "btspec", "sta", "significance"};

}  // namespace

RunConfig parse_config(const std::string& path) {
  RunConfig cfg;
  cfg.config_text = read_file(path);
  json j;
  try {
    j = json::parse(cfg.config_text);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }

  if (!j.contains("mesh")) config_fail("mesh", "missing");
  const json& jm = j.at("mesh");
  const bool has_files = jm.contains("node_path") || jm.contains("ele_path");
  const bool has_box = jm.contains("box");
  if (has_files == has_box)
    config_fail("mesh", "exactly one of {node_path+ele_path, box} is required");
  if (has_files) {
    cfg.mesh_files = {get_required<std::string>(jm, "node_path"),
                      get_required<std::string>(jm, "ele_path")};
  } else {
    const json& jb = jm.at("box");
    BoxSpec box;
    const auto ext = get_required<std::vector<double>>(jb, "extent_um");
    if (ext.size() != 3) config_fail("mesh.box.extent_um", "expected 3 entries");
    box.lx = ext[0];
    box.ly = ext[1];
    box.lz = ext[2];
    const auto cells = get_required<std::vector<int>>(jb, "cells_per_axis");
    if (cells.size() != 3) config_fail("mesh.box.cells_per_axis", "expected 3 entries");
    box.nx = cells[0];
    box.ny = cells[1];
    box.nz = cells[2];
    cfg.box = box;
  }

  cfg.D0 = get_required<double>(j, "D0_um2_per_ms");
  if (cfg.D0 <= 0) config_fail("D0_um2_per_ms", "must be positive");
  cfg.rho = get_or<double>(j, "rho", 1.0);
  cfg.l_s_min = get_required<double>(j, "l_s_min_um");
  if (cfg.l_s_min <= 0) config_fail("l_s_min_um", "must be positive");

  if (!j.contains("sequences") || !j.at("sequences").is_array() || j.at("sequences").empty())
    config_fail("sequences", "at least one sequence is required");
  int seq_idx = 0;
  for (const json& js : j.at("sequences")) {
    const std::string type = get_or<std::string>(js, "type", "pgse");
    if (type != "pgse") config_fail("sequences[].type", "only 'pgse' is supported");
    const double delta = get_required<double>(js, "delta_ms");
    const double Delta = get_required<double>(js, "Delta_ms");
    std::string id = get_or<std::string>(js, "id", "seq" + std::to_string(seq_idx + 1));
    try {
      cfg.sequences.emplace_back(delta, Delta, id);
    } catch (const InputError& e) {
      config_fail("sequences[" + std::to_string(seq_idx) + "]", e.what());
    }
    ++seq_idx;
  }

  const bool has_b = j.contains("bvalues_s_mm2");
  const bool has_amp = j.contains("amplitudes_T_m");
  if (has_b == has_amp)
    config_fail("bvalues_s_mm2", "exactly one of {bvalues_s_mm2, amplitudes_T_m} is required");
  if (has_b) {
    cfg.bvalues = get_required<std::vector<double>>(j, "bvalues_s_mm2");
    for (double b : cfg.bvalues)
      if (b < 0) config_fail("bvalues_s_mm2", "b-values must be >= 0");
    if (cfg.bvalues.empty()) config_fail("bvalues_s_mm2", "must be non-empty");
  } else {
    cfg.amplitudes = get_required<std::vector<double>>(j, "amplitudes_T_m");
    for (double a : cfg.amplitudes)
      if (a < 0) config_fail("amplitudes_T_m", "amplitudes must be >= 0");
    if (cfg.amplitudes.empty()) config_fail("amplitudes_T_m", "must be non-empty");
  }

  if (j.contains("directions")) {
    const json& jd = j.at("directions");
    cfg.n_directions = get_required<int>(jd, "count");
    if (cfg.n_directions < 1) config_fail("directions.count", "must be >= 1");
    cfg.hemisphere = get_or<bool>(jd, "hemisphere", false);
  }

  cfg.methods = get_required<std::vector<std::string>>(j, "methods");
  if (cfg.methods.empty()) config_fail("methods", "at least one method is required");
  for (const auto& m : cfg.methods)
    if (!kMethods.count(m)) config_fail("methods", "unknown method '" + m + "'");

  if (j.contains("btpde")) {
    const json& jb = j.at("btpde");
    cfg.btpde_opts.atol = get_or<double>(jb, "atol", cfg.btpde_opts.atol);
    cfg.btpde_opts.rtol = get_or<double>(jb, "rtol", cfg.btpde_opts.rtol);
    cfg.btpde_opts.theta = get_or<double>(jb, "theta", cfg.btpde_opts.theta);
    cfg.btpde_opts.max_step_ms = get_or<double>(jb, "max_step_ms", cfg.btpde_opts.max_step_ms);
    if (cfg.btpde_opts.atol <= 0 || cfg.btpde_opts.rtol <= 0)
      config_fail("btpde", "tolerances must be positive");
  }

  if (j.contains("btspec")) {
    const json& jb = j.at("btspec");
    if (jb.contains("direction")) {
      const auto d = get_required<std::vector<double>>(jb, "direction");
      if (d.size() != 3) config_fail("btspec.direction", "expected 3 entries");
      const double n = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
      if (n == 0) config_fail("btspec.direction", "must be nonzero");
      cfg.btspec.direction = {d[0] / n, d[1] / n, d[2] / n};
    }
    cfg.btspec.amplitudes_T_m = get_or<std::vector<double>>(jb, "amplitudes_T_m", {});
    cfg.btspec.significance_threshold =
        get_or<double>(jb, "significance_threshold", cfg.btspec.significance_threshold);
    cfg.btspec.a_delta_threshold =
        get_or<double>(jb, "a_delta_threshold", cfg.btspec.a_delta_threshold);
    cfg.btspec.support_frac = get_or<double>(jb, "support_frac", cfg.btspec.support_frac);
    cfg.btspec.support_modes = get_or<std::vector<int>>(jb, "support_modes", {});
  }

  cfg.significance_thresholds =
      get_or<std::vector<double>>(j, "significance_thresholds", cfg.significance_thresholds);
  cfg.threads = get_or<int>(j, "threads", 0);
  cfg.rms = get_or<bool>(j, "rms", false);
  cfg.eig_cache = get_or<std::string>(j, "eig_cache", "");
  cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);
  return cfg;
}

namespace {

struct Manifest {
  json stages = json::array();
  json files = json::array();
  bool eig_cache_hit = false;

  void add_stage(const std::string& name, double wall_ms, long items = -1) {
    json s{{"name", name}, {"wall_ms", wall_ms}};
    if (items >= 0) s["items"] = items;
    stages.push_back(std::move(s));
  }
};

struct Pipeline {
  const RunConfig& cfg;
  Manifest man;
  mesh::Mesh mesh;
  fem::FemMatrices fem;
  eig::LaplaceEig eigd;
  mf::MFModel model;
  bool have_mesh = false, have_fem = false, have_eig = false, have_model = false;

  explicit Pipeline(const RunConfig& c) : cfg(c) {
    std::filesystem::create_directories(cfg.output_dir);
  }

  std::string out_path(const std::string& name) const { return cfg.output_dir + "/" + name; }

  void emit(const std::string& name, const std::string& content) {
    write_file_atomic(out_path(name), content);
    man.files.push_back(json{{"name", name},
                             {"sha256", to_hex(sha256_string(content))},
                             {"bytes", content.size()}});
  }

  void ensure_mesh() {
    if (have_mesh) return;
    const double t0 = now_ms();
    if (cfg.mesh_files) {
      mesh = mesh::load_mesh(cfg.mesh_files->first, cfg.mesh_files->second);
    } else {
      const BoxSpec& b = *cfg.box;
      mesh = mesh::generate_box_mesh(b.lx, b.ly, b.lz, b.nx, b.ny, b.nz);
    }
    man.add_stage("mesh", now_ms() - t0);
    have_mesh = true;
  }

  void ensure_fem() {
    if (have_fem) return;
    ensure_mesh();
    const double t0 = now_ms();
    fem = fem::assemble(mesh, cfg.D0);
    man.add_stage("assemble", now_ms() - t0);
    have_fem = true;
  }

  void ensure_eig() {
    if (have_eig) return;
    ensure_fem();
    const double t0 = now_ms();
    const std::string cache =
        cfg.eig_cache.empty() ? out_path("eig.bin") : cfg.eig_cache;
    bool hit = false;
    if (std::filesystem::exists(cache)) {
      try {
        eig::LaplaceEig loaded = eig::load_eig(cache, &fem.mesh_fingerprint);
        if (loaded.D0 == cfg.D0 && loaded.l_s_min == cfg.l_s_min) {
          eigd = std::move(loaded);
          hit = true;
        }
      } catch (const InputError&) {
        hit = false;  // stale or foreign cache: recompute
      }
    }
    if (!hit) {
      eigd = eig::solve_interval(fem, cfg.l_s_min);
      eig::save_eig(eigd, cache);
    }
    man.eig_cache_hit = hit;
    man.add_stage("eig", now_ms() - t0, eigd.neig());
    have_eig = true;
  }

  void ensure_model() {
    if (have_model) return;
    ensure_eig();
    const double t0 = now_ms();
    model = mf::build_model(eigd, fem, cfg.rho);
    man.add_stage("build_model", now_ms() - t0);
    have_model = true;
  }

  void write_manifest(bool completed, const std::string& error = {}) {
    json m{{"tool", "spectral-dmri"},
           {"version", "1.0.0"},
           {"completed", completed},
           {"config_sha256", to_hex(sha256_string(cfg.config_text))},
           {"eig_cache_hit", man.eig_cache_hit},
           {"stages", man.stages},
           {"files", man.files}};
    if (!error.empty()) m["error"] = error;
    write_file_atomic(out_path("manifest.json"), m.dump(1) + "\n");
  }
};

struct WorkItem {
  int seq_idx;
  double b_s_mm2;
  double amplitude;
  seq::Vec3 direction;
};

std::vector<WorkItem> build_work_items(const RunConfig& cfg) {
  std::vector<WorkItem> items;
  const auto dirs = seq::directions(cfg.n_directions, cfg.hemisphere);
  for (std::size_t s = 0; s < cfg.sequences.size(); ++s) {
    const auto& sq = cfg.sequences[s];
    std::vector<std::pair<double, double>> b_amp;  // (b, amplitude)
    if (!cfg.bvalues.empty()) {
      for (double b : cfg.bvalues) b_amp.emplace_back(b, seq::amplitude_for_b(sq, b));
    } else {
      for (double a : cfg.amplitudes) b_amp.emplace_back(seq::bvalue(sq, a), a);
    }
    for (const auto& [b, amp] : b_amp)
      for (const auto& d : dirs)
        items.push_back({static_cast<int>(s), b, amp, d});
  }
  return items;
}

void signal_stage(Pipeline& pipe, const std::string& method) {
  const RunConfig& cfg = pipe.cfg;
  const std::vector<WorkItem> items = build_work_items(cfg);
  std::vector<mf::SignalRecord> recs(items.size());
  const double t0 = now_ms();

  if (method == "btpde") {
    pipe.ensure_fem();
    parallel_for_index(items.size(), cfg.threads, [&](std::size_t i) {
      const WorkItem& w = items[i];
      const seq::Gradient g(w.direction, w.amplitude);
      recs[i] = btpde::btpde_signal(pipe.fem, g, cfg.sequences[w.seq_idx], cfg.btpde_opts,
                                    cfg.rho);
    });
  } else if (method == "mf") {
    pipe.ensure_model();
    parallel_for_index(items.size(), cfg.threads, [&](std::size_t i) {
      const WorkItem& w = items[i];
      recs[i] = mf::mf_signal(pipe.model, seq::Gradient(w.direction, w.amplitude),
                              cfg.sequences[w.seq_idx]);
    });
  } else if (method == "mfga") {
    pipe.ensure_model();
    parallel_for_index(items.size(), cfg.threads, [&](std::size_t i) {
      const WorkItem& w = items[i];
      recs[i] = mf::mfga_signal(pipe.model, w.b_s_mm2, w.direction, cfg.sequences[w.seq_idx]);
    });
  } else {
    throw InputError("unknown signal method: " + method);
  }

  pipe.man.add_stage("signal_" + method, now_ms() - t0, static_cast<long>(items.size()));
  pipe.emit("signals_" + method + ".csv", mf::signals_to_csv(recs));
  pipe.emit("signals_" + method + ".json", mf::signals_to_json(recs));
}

void sta_stage(Pipeline& pipe) {
  const RunConfig& cfg = pipe.cfg;
  pipe.ensure_mesh();
  const double t0 = now_ms();
  const auto dirs = seq::directions(cfg.n_directions, cfg.hemisphere);
  std::string csv = "seq_id,delta_ms,Delta_ms,gx,gy,gz,sta_adc_um2_ms\n";
  for (const auto& sq : cfg.sequences)
    for (const auto& d : dirs) {
      const double adc = analysis::sta_adc(pipe.mesh, cfg.D0, sq, d);
      csv += sq.id + "," + format_g17(sq.delta_ms) + "," + format_g17(sq.Delta_ms) + "," +
             format_g17(d[0]) + "," + format_g17(d[1]) + "," + format_g17(d[2]) + "," +
             format_g17(adc) + "\n";
    }
  pipe.man.add_stage("sta", now_ms() - t0);
  pipe.emit("sta.csv", csv);
}

void significance_stage(Pipeline& pipe) {
  const RunConfig& cfg = pipe.cfg;
  pipe.ensure_model();
  const double t0 = now_ms();
  const auto dirs = seq::directions(cfg.n_directions, cfg.hemisphere);

  struct Column {
    std::string label;
    std::vector<double> e_rm;  // for modes 2..N (0-based 1..N-1)
  };
  std::vector<Column> cols;
  for (const auto& sq : cfg.sequences) {
    std::vector<double> bs = cfg.bvalues;
    if (bs.empty())
      for (double a : cfg.amplitudes) bs.push_back(seq::bvalue(sq, a));
    for (double b : bs) {
      if (b <= 0) continue;  // removing modes never changes the b = 0 signal
      Column c;
      c.label = "E_rm_" + sq.id + "_b" + format_g17(b);
      c.e_rm = analysis::remove_one_significance(pipe.model, dirs, sq, b, cfg.threads);
      cols.push_back(std::move(c));
    }
  }

  std::string csv = "n,lambda_ms^-1,l_s_um,a1x,a1y,a1z,rgb_r,rgb_g,rgb_b,undirected";
  for (const auto& c : cols) csv += "," + c.label;
  csv += "\n";
  for (int n = 0; n < pipe.model.neig(); ++n) {
    const seq::Vec3 a1 = {pipe.model.a1(0, n), pipe.model.a1(1, n), pipe.model.a1(2, n)};
    seq::Vec3 rgb;
    const bool directed = analysis::rgb_direction(a1, rgb);
    csv += std::to_string(n + 1);
    csv += "," + format_g17(pipe.model.L[n]);
    csv += "," + format_g17(eig::length_scale(pipe.model.L[n], cfg.D0));
    for (double v : {a1[0], a1[1], a1[2], rgb[0], rgb[1], rgb[2]}) csv += "," + format_g17(v);
    csv += directed ? ",0" : ",1";
    for (const auto& c : cols) csv += "," + (n == 0 ? "" : format_g17(c.e_rm[n - 1]));
    csv += "\n";
  }
  pipe.man.add_stage("significance", now_ms() - t0);
  pipe.emit("significance.csv", csv);

  // Per-threshold significant counts, one JSON block per (seq,b) column.
  json sig = json::array();
  for (const auto& c : cols) {
    json entry{{"column", c.label}};
    for (double thr : cfg.significance_thresholds) {
      int count = 0;
      for (double e : c.e_rm) count += (e >= thr) ? 1 : 0;
      entry["count_at_" + format_g17(thr)] = count;
    }
    sig.push_back(std::move(entry));
  }
  pipe.emit("significant_modes.json", sig.dump(1) + "\n");
}

void btspec_stage(Pipeline& pipe) {
  const RunConfig& cfg = pipe.cfg;
  pipe.ensure_model();
  const double t0 = now_ms();

  std::vector<double> amps = cfg.btspec.amplitudes_T_m;
  if (amps.empty()) {
    // Default: amplitudes realizing the configured b-values on the first
    // sequence.
    for (double b : cfg.bvalues)
      if (b > 0) amps.push_back(seq::amplitude_for_b(cfg.sequences[0], b));
    for (double a : cfg.amplitudes)
      if (a > 0) amps.push_back(a);
  }
  if (amps.empty()) throw InputError("btspec requires at least one nonzero amplitude");

  for (std::size_t ai = 0; ai < amps.size(); ++ai) {
    const seq::Gradient g(cfg.btspec.direction, amps[ai]);
    const btspec::BtEig bt = btspec::bt_eigendecomposition(pipe.model, g);
    const std::string tag = "g" + std::to_string(ai + 1);

    const auto sig = btspec::significant_bt(bt, cfg.btspec.significance_threshold);
    std::set<int> sig_set(sig.begin(), sig.end());
    std::string modes_csv = "j,re_mu_ms^-1,im_mu_ms^-1,abs_V1j,significant\n";
    for (int jm = 0; jm < bt.neig(); ++jm) {
      modes_csv += std::to_string(jm + 1);
      modes_csv += "," + format_g17(bt.mus[jm].real());
      modes_csv += "," + format_g17(bt.mus[jm].imag());
      modes_csv += "," + format_g17(std::abs(bt.V(0, jm)));
      modes_csv += sig_set.count(jm) ? ",1\n" : ",0\n";
    }
    pipe.emit("bt_modes_" + tag + ".csv", modes_csv);

    for (const auto& sq : cfg.sequences) {
      const Eigen::MatrixXcd a = btspec::a_delta_matrix(bt, sq.delta_ms);
      std::string grid_csv = "j,k,abs_Ajk,marked\n";
      for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) {
          const double mag = std::abs(a(r, c));
          if (mag < cfg.btspec.a_delta_threshold / 16.0) continue;  // keep files bounded
          grid_csv += std::to_string(r + 1) + "," + std::to_string(c + 1) + "," +
                      format_g17(mag) + "," +
                      (mag >= cfg.btspec.a_delta_threshold ? "1" : "0") + "\n";
        }
      pipe.emit("a_delta_grid_" + tag + "_" + sq.id + ".csv", grid_csv);
    }

    for (int mode_1based : cfg.btspec.support_modes) {
      const int jdx = mode_1based - 1;
      const btspec::SupportRegion sup = btspec::support_region(bt, pipe.eigd, jdx,
                                                               cfg.btspec.support_frac);
      std::string sup_csv = "node_index,abs_psi\n";
      for (std::size_t i = 0; i < sup.nodes.size(); ++i)
        sup_csv += std::to_string(sup.nodes[i] + 1) + "," + format_g17(sup.abs_psi[i]) + "\n";
      pipe.emit("support_" + std::to_string(mode_1based) + "_" + tag + ".csv", sup_csv);
    }
  }
  pipe.man.add_stage("btspec", now_ms() - t0);
}

}  // namespace

void run_pipeline(const RunConfig& cfg, const std::vector<std::string>& methods_in) {
  Pipeline pipe(cfg);
  const std::vector<std::string>& methods = methods_in.empty() ? cfg.methods : methods_in;
  try {
    for (const std::string& m : {"mf", "mfga", "btpde"})
      if (std::find(methods.begin(), methods.end(), m) != methods.end()) signal_stage(pipe, m);
    if (std::find(methods.begin(), methods.end(), "sta") != methods.end()) sta_stage(pipe);
    if (std::find(methods.begin(), methods.end(), "significance") != methods.end())
      significance_stage(pipe);
    if (std::find(methods.begin(), methods.end(), "btspec") != methods.end()) btspec_stage(pipe);
  } catch (const std::exception& e) {
    pipe.write_manifest(false, e.what());
    throw;
  }
  pipe.write_manifest(true);
}

std::string mesh_info(const RunConfig& cfg) {
  Pipeline pipe(cfg);
  pipe.ensure_mesh();
  const mesh::Mesh& m = pipe.mesh;
  const double vol = mesh::volume(m);
  const double area = mesh::surface_area(m);
  const double ax = mesh::directional_area(m, {1, 0, 0});
  const double ay = mesh::directional_area(m, {0, 1, 0});
  const double az = mesh::directional_area(m, {0, 0, 1});
  const auto c = mesh::centroid(m);

  json info{{"nodes", m.num_nodes()},
            {"elements", m.num_elements()},
            {"boundary_faces", m.boundary_faces.size()},
            {"volume_um3", vol},
            {"surface_um2", area},
            {"directional_area_x_um2", ax},
            {"directional_area_y_um2", ay},
            {"directional_area_z_um2", az},
            {"centroid_um", {c[0], c[1], c[2]}},
            {"fingerprint_sha256", to_hex(mesh::fingerprint(m))}};
  pipe.emit("mesh_info.json", info.dump(1) + "\n");
  pipe.write_manifest(true);

  std::ostringstream out;
  out << "nodes: " << m.num_nodes() << "\nelements: " << m.num_elements()
      << "\nboundary_faces: " << m.boundary_faces.size() << "\nvolume_um3: " << format_g17(vol)
      << "\nsurface_um2: " << format_g17(area) << "\nA_x_um2: " << format_g17(ax)
      << "\nA_y_um2: " << format_g17(ay) << "\nA_z_um2: " << format_g17(az) << "\n";
  return out.str();
}

void eig_only(const RunConfig& cfg) {
  Pipeline pipe(cfg);
  try {
    pipe.ensure_eig();
  } catch (const std::exception& e) {
    pipe.write_manifest(false, e.what());
    throw;
  }
  pipe.write_manifest(true);
}

void compare_signals(const RunConfig& cfg, const std::string& csv_a, const std::string& csv_b) {
  const auto recs_a = mf::signals_from_csv(read_file(csv_a));
  const auto recs_b = mf::signals_from_csv(read_file(csv_b));

  // Group by (seq_id, b); directions must match pairwise.
  using Key = std::pair<std::string, double>;
  std::map<Key, analysis::DirectionSweep> sweeps;
  for (const auto& r : recs_a) sweeps[{r.seq_id, r.b_s_mm2}].test.push_back(r);
  for (const auto& r : recs_b) sweeps[{r.seq_id, r.b_s_mm2}].reference.push_back(r);

  json out = json::array();
  for (auto& [key, sweep] : sweeps) {
    if (sweep.test.size() != sweep.reference.size())
      throw InputError("compare: mismatched sweeps for seq '" + key.first + "' b=" +
                       format_g17(key.second));
    for (std::size_t i = 0; i < sweep.test.size(); ++i) {
      const auto& da = sweep.test[i].direction;
      const auto& db = sweep.reference[i].direction;
      const double dd = std::abs(da[0] - db[0]) + std::abs(da[1] - db[1]) +
                        std::abs(da[2] - db[2]);
      if (dd > 1e-12)
        throw InputError("compare: direction sets differ for seq '" + key.first + "'");
    }
    const double e = analysis::signal_difference(sweep);
    json entry{{"seq_id", key.first},
               {"bvalue_s_mm2", key.second},
               {"directions", sweep.test.size()},
               {"method_a", sweep.test.front().method},
               {"method_b", sweep.reference.front().method},
               {"E", e},
               {"E_percent", 100.0 * e}};
    if (cfg.rms) {
      entry["rms"] = std::sqrt(e);
      entry["rms_percent"] = 100.0 * std::sqrt(e);
    }
    out.push_back(std::move(entry));
  }
  Pipeline pipe(cfg);
  pipe.emit("compare.json", out.dump(1) + "\n");
  pipe.write_manifest(true);
}

int main_cli(int argc, char** argv) {
  CLI::App app{"Diffusion MRI signals from Laplace-eigenbasis reduced models, with a "
               "Bloch-Torrey PDE reference solver"};
  app.require_subcommand(1);

  std::string config_path, out_dir, csv_a, csv_b;
  int threads = -1;
  bool rms = false;

  auto add_common = [&](CLI::App* sub, bool needs_config = true) {
    auto* opt = sub->add_option("--config", config_path, "JSON run configuration");
    if (needs_config) opt->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--threads", threads, "worker threads (0 = hardware default)");
    sub->add_flag("--rms", rms, "also report sqrt(E) in comparisons");
  };

  CLI::App* c_run = app.add_subcommand("run", "full pipeline for all configured methods");
  add_common(c_run);
  CLI::App* c_mesh = app.add_subcommand("mesh-info", "mesh geometry summary");
  add_common(c_mesh);
  CLI::App* c_eig = app.add_subcommand("eig", "assemble and solve/load the eigendecomposition");
  add_common(c_eig);
  CLI::App* c_sig = app.add_subcommand("signal", "signal methods only (mf/mfga/btpde)");
  add_common(c_sig);
  CLI::App* c_btspec = app.add_subcommand("btspec", "Bloch-Torrey spectral outputs");
  add_common(c_btspec);
  CLI::App* c_sta = app.add_subcommand("sta", "short-time ADC approximation");
  add_common(c_sta);
  CLI::App* c_cmp = app.add_subcommand("compare", "compare two signal CSVs");
  add_common(c_cmp);
  c_cmp->add_option("--a", csv_a, "first signals csv")->required();
  c_cmp->add_option("--b", csv_b, "second signals csv (reference)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = parse_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (threads >= 0) cfg.threads = threads;
    if (rms) cfg.rms = true;

    if (c_run->parsed()) {
      run_pipeline(cfg);
    } else if (c_mesh->parsed()) {
      std::cout << mesh_info(cfg);
    } else if (c_eig->parsed()) {
      eig_only(cfg);
    } else if (c_sig->parsed()) {
      std::vector<std::string> subset;
      for (const auto& m : cfg.methods)
        if (m == "mf" || m == "mfga" || m == "btpde") subset.push_back(m);
      if (subset.empty()) throw InputError("config methods contain no signal method");
      run_pipeline(cfg, subset);
    } else if (c_btspec->parsed()) {
      run_pipeline(cfg, {"btspec"});
    } else if (c_sta->parsed()) {
      run_pipeline(cfg, {"sta"});
    } else if (c_cmp->parsed()) {
      compare_signals(cfg, csv_a, csv_b);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

}  // namespace sdmri::cli
