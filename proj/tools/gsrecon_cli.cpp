// gsrecon: mesh generation, forward solves, synthetic data, reconstruction,
// perturbation sweeps and result comparison.

#include "gsrecon/cases.hpp"
#include "gsrecon/io.hpp"
#include "gsrecon/svg.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace gsrecon;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDiffer = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  std::string mode;
  std::string sequence;
  double perturb = 0.0;
  int seeds = -1;
  std::string eps_grid;
  double target_h = 0.0;
  std::string profile;

  std::string contour, vessel = "reference";
  std::string case_name = "reference";
  double a_scale = 1.0;
  std::string bundle, mesh, measurements, truth;
  int frames = 0;
  double ramp_end = 1.1;
  std::string result_a, result_b;
  double rtol = 1e-6, atol = 1e-9;
  int threads = 0;
};

/// Output directory with its manifest.
class Run {
 public:
  Run(std::string command, const std::string& out) : dir_(out) {
    if (out.empty()) throw config_error("--out is required");
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw io_error("cannot create output directory " + out + ": " + ec.message());
    manifest_.command = std::move(command);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }
  void input(const fs::path& p) { manifest_.inputs[p.string()] = file_hash(p); }
  void output(const std::string& name) { manifest_.outputs[name] = file_hash(path(name)); }
  void timing(const std::string& stage, double seconds) { manifest_.timings.emplace_back(stage, seconds); }
  void warn(const std::string& w) {
    if (std::find(manifest_.warnings.begin(), manifest_.warnings.end(), w) == manifest_.warnings.end())
      manifest_.warnings.push_back(w);
  }
  void note(const std::string& n) { manifest_.notes.push_back(n); }
  void config(std::vector<std::pair<std::string, std::string>> c) { manifest_.config = std::move(c); }
  void finish() { save_manifest(manifest_, dir_); }

 private:
  fs::path dir_;
  RunManifest manifest_;
};

SolverConfig solver_config(const Options& o) {
  SolverConfig cfg;
  if (!o.config.empty()) cfg = load_config(o.config);
  if (!o.mode.empty()) cfg.mode = parse_mode(o.mode);
  cfg.validate();
  return cfg;
}

std::string fmt(double v, int digits = 10) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path.string());
  out << text;
  if (!out) throw io_error("failed writing " + path.string());
}

std::string table_csv(const ProfileTable& t) {
  std::ostringstream o;
  o << "x,A,B,n_e,p,f,f2,q\n";
  for (std::size_t i = 0; i < t.x.size(); ++i)
    o << fmt(t.x[i]) << ',' << fmt(t.A[i]) << ',' << fmt(t.B[i]) << ',' << fmt(t.ne[i]) << ',' << fmt(t.p[i]) << ','
      << fmt(t.f[i]) << ',' << fmt(t.f2[i]) << ',' << fmt(t.q[i]) << '\n';
  return o.str();
}

std::string trace_csv(const std::vector<IterationRecord>& trace) {
  std::ostringstream o;
  o << "iteration,J0,J1,J2,J3,J_Ip,J_eps,total,change,seconds\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& e = trace[i];
    o << i << ',' << fmt(e.J0) << ',' << fmt(e.J1) << ',' << fmt(e.J2) << ',' << fmt(e.J3) << ',' << fmt(e.J_Ip)
      << ',' << fmt(e.J_eps) << ',' << fmt(e.total) << ',' << fmt(e.change) << ',' << fmt(e.seconds) << '\n';
  }
  return o.str();
}

void profile_plots(Run& run, const ProfileTable& t, const ProfileTable* truth) {
  SvgFigure src("Current profiles", "normalized flux", "A, B (A/m^2)");
  src.add(t.x, t.A, "A", "#1f77b4").add(t.x, t.B, "B", "#d62728");
  if (truth) src.add(truth->x, truth->A, "A truth", "#1f77b4", true).add(truth->x, truth->B, "B truth", "#d62728", true);
  src.save(run.path("profiles.svg"));
  run.output("profiles.svg");

  SvgFigure q("Safety factor", "normalized flux", "q");
  q.add(t.x, t.q, "q", "#2ca02c");
  if (truth) q.add(truth->x, truth->q, "q truth", "#2ca02c", true);
  q.save(run.path("q.svg"));
  run.output("q.svg");
}

void boundary_plot(Run& run, const Mesh& mesh, const Polyline& contour, const Polyline* truth) {
  SvgFigure fig("Plasma boundary", "r (m)", "z (m)");
  fig.equal_aspect();
  fig.add(mesh.boundary_polygon(), "vessel", "#555555");
  if (truth) fig.add(*truth, "truth", "#000000", true, true);
  fig.add(contour, "reconstructed", "#d62728");
  fig.save(run.path("boundary.svg"));
  run.output("boundary.svg");
}

void trace_plot(Run& run, const std::vector<IterationRecord>& trace) {
  std::vector<double> it, change;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    it.push_back(static_cast<double>(i));
    change.push_back(trace[i].change);
  }
  SvgFigure fig("Convergence", "iteration", "relative flux change");
  fig.log_y().add(it, change, "change", "#1f77b4");
  fig.save(run.path("trace.svg"));
  run.output("trace.svg");
}

struct Bundle {
  fs::path mesh_path, meas_path;
  std::optional<fs::path> truth_path;
};

Bundle resolve_inputs(const Options& o) {
  Bundle b;
  if (!o.bundle.empty()) {
    const fs::path d(o.bundle);
    b.mesh_path = d / "mesh.txt";
    b.meas_path = d / "measurements.txt";
    if (fs::exists(d / "truth.txt")) b.truth_path = d / "truth.txt";
  }
  if (!o.mesh.empty()) b.mesh_path = o.mesh;
  if (!o.measurements.empty()) b.meas_path = o.measurements;
  if (!o.truth.empty()) b.truth_path = fs::path(o.truth);
  if (b.mesh_path.empty() || b.meas_path.empty())
    throw config_error("give --bundle DIR or both --mesh and --measurements");
  return b;
}

std::string angle_histogram(const Mesh& mesh) {
  std::array<int, 7> bins{};
  double min_angle = 180.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    for (int k = 0; k < 3; ++k) {
      const Point a = mesh.node(tri[(k + 1) % 3]) - mesh.node(tri[k]);
      const Point b = mesh.node(tri[(k + 2) % 3]) - mesh.node(tri[k]);
      const double ang = std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0)) * 180.0 / M_PI;
      min_angle = std::min(min_angle, ang);
      bins[std::min(6, static_cast<int>(ang / 10.0))]++;
    }
  }
  std::ostringstream o;
  o << "minimum angle " << fmt(min_angle, 4) << " deg\nangle histogram:";
  const char* names[] = {"0-10", "10-20", "20-30", "30-40", "40-50", "50-60", "60+"};
  for (int i = 0; i < 7; ++i) o << ' ' << names[i] << ':' << bins[i];
  return o.str();
}

int cmd_mesh(const Options& o) {
  if (!(o.target_h > 0.0)) throw config_error("--target-h must be > 0");
  Run run("mesh", o.out);
  const auto t0 = Clock::now();
  Polyline contour;
  if (!o.contour.empty()) {
    contour = load_contour(o.contour);
    run.input(o.contour);
  } else if (o.vessel == "reference") {
    contour = ReferenceMachine{}.vessel();
  } else if (o.vessel == "soloviev") {
    contour = Soloviev{}.boundary();
  } else {
    throw config_error("unknown vessel '" + o.vessel + "' (expected reference or soloviev)");
  }
  const Mesh mesh = generate_vessel_mesh(contour, o.target_h);
  run.timing("mesh", since(t0));
  save_mesh(mesh, run.path("mesh.txt"));
  run.output("mesh.txt");
  SvgFigure fig("Mesh boundary", "r (m)", "z (m)");
  fig.equal_aspect().add(contour, "contour", "#000000", true, true).add(mesh.boundary_polygon(), "mesh", "#d62728");
  fig.save(run.path("mesh.svg"));
  run.output("mesh.svg");
  run.config({{"target_h", fmt(o.target_h)}, {"source", o.contour.empty() ? o.vessel : o.contour}});
  std::printf("nodes %d\ntriangles %d\nboundary nodes %d\n%s\n", mesh.num_nodes(), mesh.num_triangles(),
              mesh.num_boundary(), angle_histogram(mesh).c_str());
  run.finish();
  return kExitOk;
}

void write_bundle(Run& run, const Mesh& mesh, const SyntheticCase& sc, const std::string& prefix = "") {
  save_mesh(mesh, run.path(prefix + "mesh.txt"));
  run.output(prefix + "mesh.txt");
  save_measurements(sc.measurements, run.path(prefix + "measurements.txt"));
  run.output(prefix + "measurements.txt");
  save_result(make_result(mesh, sc.flux, sc.truth), run.path(prefix + "truth.txt"));
  run.output(prefix + "truth.txt");
  for (const auto& w : sc.flux.warnings) run.warn(w);
}

SyntheticCase forward_case(const Options& o, std::shared_ptr<const Mesh>& mesh, double a_scale) {
  if (o.case_name == "soloviev") {
    if (!o.profile.empty()) throw config_error("--profile does not apply to the soloviev case");
    const Soloviev s;
    SyntheticCase sc = soloviev_case(s, o.target_h > 0.0 ? o.target_h : 0.05);
    mesh = sc.mesh;
    return sc;
  }
  if (o.case_name != "reference") throw config_error("unknown case '" + o.case_name + "' (expected soloviev or reference)");
  if (o.profile.empty()) throw config_error("the reference case needs --profile monotonic|reversed-shear");
  const ProfileShape shape = parse_profile_shape(o.profile);
  if (!mesh) mesh = std::make_shared<const Mesh>(ReferenceMachine{}.mesh(o.target_h > 0.0 ? o.target_h : 0.055));
  return reference_case(mesh, shape, a_scale);
}

int cmd_forward(const Options& o) {
  Run run("forward", o.out);
  const auto t0 = Clock::now();
  std::shared_ptr<const Mesh> mesh;
  const SyntheticCase sc = forward_case(o, mesh, o.a_scale);
  run.timing("forward", since(t0));
  write_bundle(run, *mesh, sc);
  const ProfileTable table = profile_table(*mesh, sc.flux, sc.truth);
  write_text(run.path("truth_profiles.csv"), table_csv(table));
  run.output("truth_profiles.csv");
  save_contour_csv(sc.flux.boundary_contour.points, run.path("truth_boundary.csv"));
  run.output("truth_boundary.csv");
  profile_plots(run, table, nullptr);
  boundary_plot(run, *mesh, sc.flux.boundary_contour.points, nullptr);
  run.config({{"case", o.case_name},
              {"profile", o.profile},
              {"target_h", fmt(o.target_h)},
              {"a_scale", fmt(o.a_scale)}});
  std::printf("nodes %d  boundary %s  axis (%.4f, %.4f)\n", mesh->num_nodes(), to_string(sc.flux.boundary.kind),
              sc.flux.axis.position.x(), sc.flux.axis.position.y());
  if (o.case_name == "soloviev") {
    const Soloviev s;
    const double err = l2_error(*mesh, sc.flux.psi, [&](const Point& p) { return s.psi(p); });
    std::printf("L2 flux error against the analytic solution: %.6e\n", err);
    run.note("analytic L2 flux error " + fmt(err));
  }
  run.finish();
  return kExitOk;
}

int cmd_synth(const Options& o) {
  if (!(o.perturb >= 0.0)) throw config_error("--perturb must be >= 0");
  Run run("synth", o.out);
  const auto t0 = Clock::now();
  if (o.frames > 0) {
    if (o.frames < 2) throw config_error("--frames needs at least 2 frames");
    Options f = o;
    f.case_name = "reference";
    std::shared_ptr<const Mesh> mesh;
    for (int i = 0; i < o.frames; ++i) {
      const double a = 1.0 + (o.ramp_end - 1.0) * i / (o.frames - 1);
      SyntheticCase sc = forward_case(f, mesh, a);
      NoiseSpec ns;
      ns.level = o.perturb;
      ns.seed = o.seed + static_cast<std::uint64_t>(i);
      sc.measurements = perturb(sc.measurements, ns);
      char name[32];
      std::snprintf(name, sizeof name, "frame_%03d", i);
      fs::create_directories(run.path(name));
      if (i == 0) {
        save_mesh(*mesh, run.path("mesh.txt"));
        run.output("mesh.txt");
      }
      save_measurements(sc.measurements, run.path(std::string(name) + "/measurements.txt"));
      run.output(std::string(name) + "/measurements.txt");
      save_result(make_result(*mesh, sc.flux, sc.truth), run.path(std::string(name) + "/truth.txt"));
      run.output(std::string(name) + "/truth.txt");
    }
    run.config({{"profile", o.profile},
                {"frames", std::to_string(o.frames)},
                {"ramp_end", fmt(o.ramp_end)},
                {"perturb", fmt(o.perturb)},
                {"seed", std::to_string(o.seed)}});
    std::printf("wrote %d frames\n", o.frames);
  } else {
    const Bundle b = resolve_inputs(o);
    run.input(b.mesh_path);
    run.input(b.meas_path);
    NoiseSpec ns;
    ns.level = o.perturb;
    ns.seed = o.seed;
    const MeasurementSet meas = perturb(load_measurements(b.meas_path), ns);
    fs::copy_file(b.mesh_path, run.path("mesh.txt"), fs::copy_options::overwrite_existing);
    run.output("mesh.txt");
    save_measurements(meas, run.path("measurements.txt"));
    run.output("measurements.txt");
    if (b.truth_path) {
      run.input(*b.truth_path);
      fs::copy_file(*b.truth_path, run.path("truth.txt"), fs::copy_options::overwrite_existing);
      run.output("truth.txt");
    }
    run.config({{"perturb", fmt(o.perturb)}, {"seed", std::to_string(o.seed)}});
  }
  run.timing("synth", since(t0));
  run.finish();
  return kExitOk;
}

void check_boundary_size(const Mesh& mesh, const MeasurementSet& meas, const fs::path& source) {
  if (meas.h.size() != mesh.num_boundary())
    throw config_error(source.string() + ": " + std::to_string(meas.h.size()) + " boundary values for " +
                       std::to_string(mesh.num_boundary()) + " boundary nodes");
}

std::optional<ResultFile> load_truth(const std::optional<fs::path>& p) {
  if (!p) return std::nullopt;
  return load_result(*p);
}

int cmd_reconstruct_sequence(const Options& o, const SolverConfig& cfg) {
  Run run("reconstruct --sequence", o.out);
  const fs::path dir(o.sequence);
  const fs::path mesh_path = o.mesh.empty() ? dir / "mesh.txt" : fs::path(o.mesh);
  std::vector<fs::path> frame_dirs;
  if (!fs::is_directory(dir)) throw io_error("sequence directory " + dir.string() + " does not exist");
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::exists(e.path() / "measurements.txt")) frame_dirs.push_back(e.path());
  std::sort(frame_dirs.begin(), frame_dirs.end());
  if (frame_dirs.empty()) throw config_error("no frame directories with measurements.txt in " + dir.string());

  const auto t_load = Clock::now();
  const Mesh mesh = load_mesh(mesh_path);
  run.input(mesh_path);
  std::vector<MeasurementSet> frames;
  for (const auto& f : frame_dirs) {
    frames.push_back(load_measurements(f / "measurements.txt"));
    check_boundary_size(mesh, frames.back(), f / "measurements.txt");
    run.input(f / "measurements.txt");
  }
  run.timing("load", since(t_load));
  const auto t_solve = Clock::now();
  const auto results = reconstruct_sequence(mesh, frames, cfg);
  run.timing("reconstruct", since(t_solve));

  std::ostringstream lat;
  lat << "frame,iterations,seconds,mean_iteration_ms,max_iteration_ms,final_change,boundary_error,error\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    const std::string name = frame_dirs[i].filename().string() + ".txt";
    save_result(make_result(mesh, r.flux, r.profiles, &r.trace), run.path(name));
    run.output(name);
    double total = 0.0, worst = 0.0;
    for (const auto& rec : r.trace.records) total += rec.seconds, worst = std::max(worst, rec.seconds);
    double boundary_error = std::nan("");
    if (fs::exists(frame_dirs[i] / "truth.txt")) {
      const ResultFile truth = load_result(frame_dirs[i] / "truth.txt");
      if (!truth.boundary.empty() && !r.flux.boundary_contour.empty())
        boundary_error = hausdorff_distance(truth.boundary, r.flux.boundary_contour.points);
    }
    lat << frame_dirs[i].filename().string() << ',' << r.trace.size() << ',' << fmt(r.seconds) << ','
        << fmt(1e3 * total / std::max(1, r.trace.size())) << ',' << fmt(1e3 * worst) << ','
        << fmt(r.trace.records.empty() ? 0.0 : r.trace.records.back().change) << ',' << fmt(boundary_error) << ','
        << '"' << r.error << "\"\n";
    for (const auto& w : r.warnings) run.warn(frame_dirs[i].filename().string() + ": " + w);
    if (!r.error.empty()) run.warn(frame_dirs[i].filename().string() + ": re-solved from a cold start after: " + r.error);
  }
  write_text(run.path("latency.csv"), lat.str());
  run.output("latency.csv");
  run.config(config_entries(cfg));
  std::printf("reconstructed %zu frames\n", results.size());
  run.finish();
  return kExitOk;
}

int cmd_reconstruct(const Options& o) {
  const SolverConfig cfg = solver_config(o);
  if (!o.sequence.empty()) return cmd_reconstruct_sequence(o, cfg);
  Run run("reconstruct", o.out);
  const Bundle b = resolve_inputs(o);
  const auto t_load = Clock::now();
  const Mesh mesh = load_mesh(b.mesh_path);
  run.input(b.mesh_path);
  const MeasurementSet meas = load_measurements(b.meas_path);
  run.input(b.meas_path);
  check_boundary_size(mesh, meas, b.meas_path);
  const auto truth = load_truth(b.truth_path);
  if (b.truth_path) run.input(*b.truth_path);
  run.timing("load", since(t_load));

  if (cfg.mode == ReconMode::M && (!meas.chords.empty() || !meas.mse.empty()))
    run.note("mode M: " + std::to_string(meas.chords.size()) + " chords and " + std::to_string(meas.mse.size()) +
             " MSE points ignored");

  const auto t_solve = Clock::now();
  const ReconstructionResult res = reconstruct(mesh, meas, cfg);
  run.timing("reconstruct", since(t_solve));
  for (const auto& w : res.warnings) run.warn(w);

  const auto t_write = Clock::now();
  ResultFile rf = make_result(mesh, res.flux, res.profiles, &res.trace);
  rf.scalars.emplace_back("converged", res.converged ? "true" : "false");
  rf.scalars.emplace_back("iterations", std::to_string(res.trace.size()));
  rf.scalars.emplace_back("mode", to_string(cfg.mode));
  save_result(rf, run.path("result.txt"));
  run.output("result.txt");
  write_text(run.path("profiles.csv"), table_csv(rf.profiles));
  run.output("profiles.csv");
  save_contour_csv(rf.boundary, run.path("boundary.csv"));
  run.output("boundary.csv");
  write_text(run.path("trace.csv"), trace_csv(rf.trace));
  run.output("trace.csv");
  profile_plots(run, rf.profiles, truth ? &truth->profiles : nullptr);
  boundary_plot(run, mesh, rf.boundary, truth && !truth->boundary.empty() ? &truth->boundary : nullptr);
  trace_plot(run, rf.trace);
  run.timing("write", since(t_write));
  run.config(config_entries(cfg));

  std::printf("%s after %d iterations (%.3f s)\n", res.converged ? "converged" : "not converged", res.trace.size(),
              res.seconds);
  for (const char* k : {"volume", "l_i", "beta_p", "q_axis", "q95"})
    std::printf("  %-8s %s\n", k, fmt(*rf.scalar(k), 6).c_str());
  if (truth && !truth->boundary.empty())
    std::printf("  boundary distance to truth %.4g m\n", hausdorff_distance(truth->boundary, rf.boundary));
  run.finish();
  return kExitOk;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw config_error("--eps-grid: '" + item + "' is not a number");
    }
  }
  return out;
}

int cmd_sweep(const Options& o) {
  const SolverConfig cfg = solver_config(o);
  const bool perturb_mode = o.seeds >= 0 || o.perturb > 0.0;
  if (perturb_mode == !o.eps_grid.empty())
    throw config_error("sweep needs either --perturb with --seeds or --eps-grid");
  if (perturb_mode && o.seeds <= 0) throw config_error("--seeds must be >= 1");
  if (perturb_mode && !(o.perturb > 0.0)) throw config_error("--perturb must be > 0");

  Run run("sweep", o.out);
  const Bundle b = resolve_inputs(o);
  const Mesh mesh = load_mesh(b.mesh_path);
  run.input(b.mesh_path);
  const MeasurementSet base = load_measurements(b.meas_path);
  run.input(b.meas_path);
  check_boundary_size(mesh, base, b.meas_path);
  run.config(config_entries(cfg));
  const InverseContext ctx = make_context(mesh, cfg);
  const auto t0 = Clock::now();

  if (perturb_mode) {
    run.note("multiplicative noise of " + fmt(o.perturb) + " on boundary flux and probe signals");
    const int n = o.seeds;
    std::vector<std::optional<ResultFile>> rows(n);
    std::vector<std::string> errors(n);
    std::atomic<int> next{0};
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = std::min<int>(n, o.threads > 0 ? o.threads : static_cast<int>(hw));
    auto work = [&]() {
      for (int i = next++; i < n; i = next++) {
        NoiseSpec ns;
        ns.level = o.perturb;
        ns.seed = o.seed + static_cast<std::uint64_t>(i);
        ns.chords = ns.mse = ns.current = false;
        try {
          const auto res = reconstruct(ctx, perturb(base, ns), cfg);
          rows[i] = make_result(mesh, res.flux, res.profiles);
        } catch (const Error& e) {
          errors[i] = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    std::ostringstream csv;
    std::vector<std::string> keys;
    for (const auto& r : rows)
      if (r) {
        for (const auto& [k, v] : r->scalars)
          if (r->scalar(k)) keys.push_back(k);
        break;
      }
    csv << "seed";
    for (const auto& k : keys) csv << ',' << k;
    csv << ",error\n";
    std::vector<double> li;
    for (int i = 0; i < n; ++i) {
      csv << o.seed + static_cast<std::uint64_t>(i);
      for (const auto& k : keys) csv << ',' << (rows[i] ? fmt(rows[i]->scalar(k).value_or(std::nan(""))) : "nan");
      csv << ",\"" << errors[i] << "\"\n";
      if (rows[i]) li.push_back(*rows[i]->scalar("l_i"));
      else run.warn("seed " + std::to_string(o.seed + i) + ": " + errors[i]);
    }
    write_text(run.path("sweep.csv"), csv.str());
    run.output("sweep.csv");
    if (li.empty()) throw numeric_error("every perturbed reconstruction failed");
    const double mean = std::accumulate(li.begin(), li.end(), 0.0) / li.size();
    double var = 0.0;
    for (double v : li) var += (v - mean) * (v - mean);
    const double sd = li.size() > 1 ? std::sqrt(var / (li.size() - 1)) : 0.0;
    std::printf("%zu of %d reconstructions succeeded\nl_i mean %.6g std %.6g\n", li.size(), n, mean, sd);
    run.note("l_i mean " + fmt(mean) + " std " + fmt(sd));
  } else {
    std::ostringstream csv;
    csv << "eps,misfit,J_eps,seminorm,l_i,converged,error\n";
    for (double eps : parse_list(o.eps_grid)) {
      if (!(eps > 0.0)) throw config_error("--eps-grid values must be > 0");
      SolverConfig c = cfg;
      c.eps_a = c.eps_b = c.eps_ne = eps;
      try {
        const auto res = reconstruct(ctx, base, c);
        const auto& last = res.trace.records.back();
        const double li = global_scalars(mesh, res.flux, res.profiles).l_i;
        csv << fmt(eps) << ',' << fmt(last.total - last.J_eps) << ',' << fmt(last.J_eps) << ','
            << fmt(last.J_eps / eps) << ',' << fmt(li) << ',' << (res.converged ? "true" : "false") << ",\"\"\n";
      } catch (const Error& e) {
        csv << fmt(eps) << ",nan,nan,nan,nan,false,\"" << e.what() << "\"\n";
        run.warn("eps " + fmt(eps) + ": " + e.what());
      }
    }
    write_text(run.path("lcurve.csv"), csv.str());
    run.output("lcurve.csv");
    std::printf("wrote %s\n", run.path("lcurve.csv").string().c_str());
  }
  run.timing("sweep", since(t0));
  run.finish();
  return kExitOk;
}

int cmd_compare(const Options& o) {
  if (!(o.rtol >= 0.0) || !(o.atol >= 0.0)) throw config_error("tolerances must be >= 0");
  const ResultFile a = load_result(o.result_a), b = load_result(o.result_b);
  const auto diffs = compare_results(a, b, o.rtol, o.atol);
  for (const auto& d : diffs)
    std::printf("%-32s %-14s %-14s error %.3e\n", d.field.c_str(), fmt(d.a, 8).c_str(), fmt(d.b, 8).c_str(), d.error);
  std::printf("%zu field(s) differ\n", diffs.size());
  return diffs.empty() ? kExitOk : kExitDiffer;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config: return kExitConfig;
    case ErrorKind::Io:
    case ErrorKind::Parse: return kExitIo;
    default: return kExitNumeric;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equilibrium reconstruction from magnetic and internal measurements"};
  app.set_version_flag("--version", GSRECON_VERSION);
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "Solver config file (key = value)");
    c->add_option("--out", o.out, "Output directory");
    c->add_option("--seed", o.seed, "Random seed");
  };
  auto inputs = [&](CLI::App* c) {
    c->add_option("--bundle", o.bundle, "Case directory with mesh.txt, measurements.txt and truth.txt");
    c->add_option("--mesh", o.mesh, "Mesh file");
    c->add_option("--measurements", o.measurements, "Measurement file");
  };

  auto* mesh = app.add_subcommand("mesh", "Triangulate a vessel contour");
  common(mesh);
  mesh->add_option("--contour", o.contour, "Contour file of 'r z' pairs");
  mesh->add_option("--vessel", o.vessel, "Built-in contour: reference or soloviev");
  mesh->add_option("--target-h", o.target_h, "Target edge length (m)")->required();

  auto* forward = app.add_subcommand("forward", "Forward solve of a built-in case into a truth bundle");
  common(forward);
  forward->add_option("--case", o.case_name, "soloviev or reference");
  forward->add_option("--profile", o.profile, "monotonic or reversed-shear (reference case)");
  forward->add_option("--target-h", o.target_h, "Mesh edge length (m)");
  forward->add_option("--a-scale", o.a_scale, "Factor on the A profile");

  auto* synth = app.add_subcommand("synth", "Noisy copy of a bundle, or a ramped frame sequence");
  common(synth);
  inputs(synth);
  synth->add_option("--perturb", o.perturb, "Relative noise level");
  synth->add_option("--frames", o.frames, "Number of frames of a ramp of the reference case");
  synth->add_option("--ramp-end", o.ramp_end, "Factor on A in the last frame");
  synth->add_option("--profile", o.profile, "Profile shape for --frames");
  synth->add_option("--target-h", o.target_h, "Mesh edge length for --frames (m)");

  auto* recon = app.add_subcommand("reconstruct", "Reconstruct an equilibrium or a frame sequence");
  common(recon);
  inputs(recon);
  recon->add_option("--truth", o.truth, "Truth file for overlays");
  recon->add_option("--mode", o.mode, "M (magnetics only) or J (with internal measurements)");
  recon->add_option("--sequence", o.sequence, "Directory of frame directories");

  auto* sweep = app.add_subcommand("sweep", "Perturbation or regularization sweep");
  common(sweep);
  inputs(sweep);
  sweep->add_option("--mode", o.mode, "M or J");
  sweep->add_option("--perturb", o.perturb, "Relative noise on boundary flux and probes");
  sweep->add_option("--seeds", o.seeds, "Number of noise realizations");
  sweep->add_option("--eps-grid", o.eps_grid, "Comma-separated regularization values");
  sweep->add_option("--threads", o.threads, "Worker threads (default: all cores)");

  auto* compare = app.add_subcommand("compare", "Difference of two result files");
  compare->add_option("a", o.result_a, "Reference result file")->required();
  compare->add_option("b", o.result_b, "Result file to check")->required();
  compare->add_option("--rtol", o.rtol, "Relative tolerance");
  compare->add_option("--atol", o.atol, "Absolute tolerance (metres for the boundary)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*mesh) return cmd_mesh(o);
    if (*forward) return cmd_forward(o);
    if (*synth) return cmd_synth(o);
    if (*recon) return cmd_reconstruct(o);
    if (*sweep) return cmd_sweep(o);
    if (*compare) return cmd_compare(o);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e);
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitConfig;
}
