#include "effdyn/run.hpp"

#include <unistd.h>

#include <Eigen/Eigenvalues>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>

#include "effdyn/experiments.hpp"
#include "effdyn/fft.hpp"
#include "effdyn/format.hpp"
#include "effdyn/marginals.hpp"
#include "effdyn/meanfield.hpp"
#include "effdyn/nbody.hpp"
#include "effdyn/scattering.hpp"
#include "json.hpp"

namespace effdyn {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kSnapshotBudget = std::size_t{1} << 30;  // bytes held for output

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::string_view in, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + b])) << (8 * b);
  return v;
}
double get_f64(std::string_view in, std::size_t at) { return std::bit_cast<double>(get_u64(in, at)); }

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string out;
  for (const auto& c : cells) out += (out.empty() ? "" : ",") + c;
  return out + "\n";
}

std::string f(double v) { return format_double(v); }

// Artifacts held in memory until commit.
class Artifacts {
 public:
  void add(std::string name, std::string bytes) {
    bytes_ += bytes.size();
    require(bytes_ <= kSnapshotBudget, ErrorCategory::resource,
            "output exceeds " + std::to_string(kSnapshotBudget) + " bytes held for writing");
    items_.emplace_back(std::move(name), std::move(bytes));
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& item : items_) out.push_back(item.first);
    return out;
  }

  // Stage every file under a temporary name, then rename. Any failure removes
  // what was created.
  void commit(const fs::path& dir) const {
    std::vector<fs::path> staged, created_dirs, placed;
    auto cleanup = [&] {
      std::error_code ec;
      for (const auto& p : staged) fs::remove(p, ec);
      for (const auto& p : placed) fs::remove(p, ec);
      for (auto it = created_dirs.rbegin(); it != created_dirs.rend(); ++it) fs::remove(*it, ec);
    };
    try {
      for (const auto& [name, bytes] : items_) {
        const fs::path target = dir / name;
        for (fs::path parent = target.parent_path(); !parent.empty() && !fs::exists(parent);
             parent = parent.parent_path())
          created_dirs.insert(created_dirs.begin(), parent);
        for (const auto& d : created_dirs)
          if (!fs::exists(d) && !fs::create_directory(d))
            fail(ErrorCategory::io, "cannot create directory " + d.string());
        fs::path tmp = target;
        tmp += ".partial";
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        staged.push_back(tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.close();
        if (!out) fail(ErrorCategory::io, "cannot write " + tmp.string());
      }
      for (const auto& [name, bytes] : items_) {
        const fs::path target = dir / name;
        fs::path tmp = target;
        tmp += ".partial";
        fs::rename(tmp, target);
        placed.push_back(target);
        staged.erase(std::find(staged.begin(), staged.end(), tmp));
      }
    } catch (const Error&) {
      cleanup();
      throw;
    } catch (const std::exception& e) {
      cleanup();
      fail(ErrorCategory::io, std::string("writing outputs: ") + e.what());
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
  std::size_t bytes_ = 0;
};

// The output directory must exist as a writable directory, or be creatable
// under a writable existing ancestor. Checked before any computation.
void check_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::path probe = dir.empty() ? fs::path(".") : dir;
  if (fs::exists(probe, ec)) {
    require(fs::is_directory(probe, ec), ErrorCategory::io, "output path " + dir.string() + " is not a directory");
  } else {
    probe = fs::absolute(probe, ec).parent_path();
    while (!probe.empty() && !fs::exists(probe, ec)) probe = probe.parent_path();
    require(!probe.empty() && fs::is_directory(probe, ec), ErrorCategory::io,
            "output directory " + dir.string() + " cannot be created");
  }
  require(::access(probe.c_str(), W_OK | X_OK) == 0, ErrorCategory::io,
          "output directory " + probe.string() + " is not writable");
}

struct Context {
  const RunConfig& cfg;
  const RunOptions& opts;
  Artifacts files;
  json results = json::object();
  std::vector<std::string> warnings;
  // Failure reported after the partial outputs are written.
  std::optional<std::pair<ErrorCategory, std::string>> deferred;

  void log(const std::string& msg) const {
    if (opts.log) opts.log(msg);
  }
  void warn(const std::string& msg) {
    warnings.push_back(msg);
    log("warning: " + msg);
  }
};

std::string trajectory_csv(const Trajectory& traj) {
  std::string csv = "t,norm,energy,center,width\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto m = moments(traj.snapshots[i]);
    csv += csv_row({f(traj.times[i]), f(traj.conserved[i].norm), f(traj.conserved[i].energy), f(m.center), f(m.width)});
  }
  return csv;
}

void trajectory_snapshots(Context& ctx, const Trajectory& traj, const std::string& stem) {
  const auto& mode = ctx.cfg.text("output.snapshots");
  if (mode == "final") ctx.files.add(stem + "_final.bin", encode_field(traj.snapshots.back().values()));
  if (mode == "all")
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshots/%s_%04zu.bin", stem.c_str(), i);
      ctx.files.add(name, encode_field(traj.snapshots[i].values()));
    }
}

void drift_results(Context& ctx, const Trajectory& traj) {
  double dn = 0.0, de = 0.0;
  const auto& c0 = traj.conserved.front();
  for (const auto& c : traj.conserved) {
    dn = std::max(dn, std::abs(c.norm - c0.norm));
    de = std::max(de, std::abs(c.energy - c0.energy) / std::max(std::abs(c0.energy), 1e-300));
  }
  ctx.results["max_norm_drift"] = dn;
  ctx.results["max_relative_energy_drift"] = de;
}

void run_scattering(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto v = cfg.potential();
  const RadialGrid g(cfg.real("radial.R"), static_cast<std::size_t>(cfg.integer("radial.M")));
  const auto s = solve_zero_energy(v, g);
  const double a_int = scattering_length_integral(s, v);
  const auto fit = scattering_length_asymptotic(s);
  const double b0 = born_coupling(v);
  if (fit.window_inside_range)
    ctx.warn("asymptotic fit window reaches into the interaction range (residual " + f(fit.rms_residual) + ")");

  ctx.files.add("scattering.csv",
                "kind,params,M,R,a0_integral,a0_asymptotic,b0,coupling_8pi_a0\n" +
                    csv_row({kind_name(v), parameter_string(v), std::to_string(g.size()), f(g.radius()), f(a_int),
                             f(fit.a0), f(b0), f(8.0 * kPi * a_int)}));
  std::string coupling = "N,effective_coupling,one_minus_inv_N_8pi_a0\n";
  for (int n : cfg.integers("scattering.Ns")) {
    require(n >= 1, ErrorCategory::domain, "scattering.Ns entries must be positive");
    coupling += csv_row({std::to_string(n), f(effective_coupling(v, n, s)), f((1.0 - 1.0 / n) * 8.0 * kPi * a_int)});
  }
  ctx.files.add("coupling.csv", coupling);
  std::string profile = "r,f,u\n";
  for (std::size_t j = 0; j <= g.size(); ++j) profile += csv_row({f(g.r(j)), f(s.f[j]), f(s.u[j])});
  ctx.files.add("profile.csv", profile);

  ctx.results["a0_integral"] = a_int;
  ctx.results["a0_asymptotic"] = fit.a0;
  ctx.results["fit_residual"] = fit.rms_residual;
  ctx.results["b0"] = b0;
  ctx.results["coupling_8pi_a0"] = 8.0 * kPi * a_int;
}

void run_hartree(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto traj = evolve_hartree(cfg.initial_state(), ScaledPotential::unscaled(cfg.potential()), cfg.evolution());
  ctx.files.add("hartree.csv", trajectory_csv(traj));
  trajectory_snapshots(ctx, traj, "hartree");
  drift_results(ctx, traj);
}

void run_gp(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double a0 = cfg.real("gp.a0");
  if (cfg.text("gp.mode") == "ground_state") {
    const PotentialSpec trap = HarmonicTrap{cfg.real("gp.trap_kappa")};
    const auto gs = gp_ground_state(trap, a0, cfg.grid(), cfg.real("gp.tol"));
    const auto m = moments(gs.phi);
    ctx.files.add("gp.csv", "t,norm,energy,center,width\n" +
                                csv_row({"0", f(norm(gs.phi)), f(gs.energy), f(m.center), f(m.width)}));
    if (cfg.text("output.snapshots") != "none") ctx.files.add("gp_final.bin", encode_field(gs.phi.values()));
    ctx.results["energy"] = gs.energy;
    ctx.results["residual"] = gs.residual;
    ctx.results["iterations"] = gs.iterations;
    return;
  }
  const auto traj = evolve_gp(cfg.initial_state(), a0, cfg.evolution());
  ctx.files.add("gp.csv", trajectory_csv(traj));
  trajectory_snapshots(ctx, traj, "gp");
  drift_results(ctx, traj);
}

void run_nbody(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const int n = static_cast<int>(cfg.integer("nbody.N"));
  const auto evo = cfg.evolution();
  const auto& mode = cfg.text("output.snapshots");
  auto psi0 = product_state(cfg.initial_state(), n);
  std::size_t index = 0;
  auto observer = [&](double t, const NBodyState& psi) {
    if (mode == "all") {
      char name[64];
      std::snprintf(name, sizeof name, "snapshots/nbody_%04zu.bin", index);
      ctx.files.add(name, encode_nbody(psi, t));
    }
    ++index;
  };
  const auto run = evolve_nbody(std::move(psi0), NBodyHamiltonian::mean_field(cfg.potential(), n), evo, observer);
  std::string csv = "t,norm,energy\n";
  for (const auto& r : run.records) csv += csv_row({f(r.time), f(r.norm), f(r.energy)});
  ctx.files.add("nbody.csv", csv);
  if (mode == "final") ctx.files.add("nbody_final.bin", encode_nbody(run.final_state, evo.final_time()));

  std::mt19937_64 rng(static_cast<std::uint64_t>(cfg.integer("seed")));
  double dn = 0.0, de = 0.0;
  const auto& r0 = run.records.front();
  for (const auto& r : run.records) {
    dn = std::max(dn, std::abs(r.norm - r0.norm));
    de = std::max(de, std::abs(r.energy - r0.energy) / std::max(std::abs(r0.energy), 1e-300));
  }
  ctx.results["max_norm_drift"] = dn;
  ctx.results["max_relative_energy_drift"] = de;
  ctx.results["final_symmetry_residual"] = symmetry_residual(run.final_state, rng);
}

// Snapshots written by `nbody`, in file-name order.
std::vector<fs::path> snapshot_files(const fs::path& input) {
  const fs::path dir = input / "snapshots";
  require(fs::is_directory(dir), ErrorCategory::io, "no snapshots directory under " + input.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".bin") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  require(!out.empty(), ErrorCategory::io, "no snapshot files in " + dir.string());
  return out;
}

DecodedNBody read_snapshot(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(static_cast<bool>(in), ErrorCategory::io, "cannot read " + p.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_nbody(bytes);
  } catch (const Error& e) {
    fail(e.category(), p.filename().string() + ": " + e.what());
  }
}

// Leading eigenvector of the one-particle marginal, normalized on the grid.
ComplexField condensate(const ReducedDensity& gamma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gamma.kernel);
  const Eigen::VectorXcd v = es.eigenvectors().col(gamma.kernel.rows() - 1);
  ComplexField phi(gamma.grid);
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = v(static_cast<Eigen::Index>(i));
  phi *= 1.0 / norm(phi);
  return phi;
}

void run_marginals(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto v = cfg.potential();
  const int k = static_cast<int>(cfg.integer("marginals.k"));
  const double hdt = cfg.real("marginals.hartree_dt");
  require(hdt > 0.0, ErrorCategory::domain, "marginals.hartree_dt must be positive");
  const auto paths = snapshot_files(cfg.text("marginals.input"));

  struct Slice {
    double t;
    ReducedDensity gamma;
    std::optional<ReducedDensity> higher;
  };
  std::vector<Slice> slices;
  int n = 0;
  std::optional<UniformGrid> grid;
  std::optional<ComplexField> phi;
  double hartree_t = 0.0;
  std::string csv = "t,k,trace,min_eig,distance_to_hartree,bbgky_residual\n";
  std::vector<std::array<double, 4>> rows;  // trace, min_eig, distance, t
  double worst_hermiticity = 0.0, worst_exchange = 0.0;
  for (const auto& p : paths) {
    auto snap = read_snapshot(p);
    if (!grid) {
      grid = snap.state.grid();
      n = snap.state.particles();
      require(k <= n, ErrorCategory::domain, "marginals.k exceeds the particle number " + std::to_string(n));
      phi = condensate(reduce(snap.state, 1));
      hartree_t = snap.time;
    }
    require(snap.state.grid() == *grid && snap.state.particles() == n, ErrorCategory::structural,
            p.filename().string() + ": grid or particle number differs from the first snapshot");
    require(snap.time >= hartree_t, ErrorCategory::structural, p.filename().string() + ": times must increase");
    const double gap = snap.time - hartree_t;
    const auto steps = static_cast<std::size_t>(std::llround(gap / hdt));
    require(std::abs(static_cast<double>(steps) * hdt - gap) <= 1e-9 * std::max(1.0, snap.time), ErrorCategory::domain,
            "snapshot time " + f(snap.time) + " is not reached in whole Hartree steps of " + f(hdt));
    if (steps > 0) {
      EvolutionConfig e;
      e.dt = hdt;
      e.steps = steps;
      phi = evolve_hartree(*phi, ScaledPotential::unscaled(v), e).snapshots.back();
      hartree_t = snap.time;
    }
    Slice s{snap.time, reduce(snap.state, k), std::nullopt};
    if (k < n) s.higher = reduce(snap.state, k + 1);
    const auto inv = check_invariants(s.gamma);
    worst_hermiticity = std::max(worst_hermiticity, inv.hermiticity);
    worst_exchange = std::max(worst_exchange, inv.exchange_asymmetry);
    rows.push_back({inv.trace, inv.min_eigenvalue, trace_norm_distance(s.gamma, rank_one_projector(*phi, k)), s.t});
    slices.push_back(std::move(s));
    ctx.log("marginals: t = " + f(snap.time));
  }
  for (std::size_t i = 0; i < slices.size(); ++i) {
    std::string residual = "nan";
    if (i > 0 && i + 1 < slices.size()) {
      const double d1 = slices[i].t - slices[i - 1].t, d2 = slices[i + 1].t - slices[i].t;
      if (std::abs(d1 - d2) <= 1e-9 * std::max(d1, d2)) {
        HierarchySnapshots h{{slices[i - 1].t, slices[i].t, slices[i + 1].t},
                             {slices[i - 1].gamma, slices[i].gamma, slices[i + 1].gamma},
                             slices[i].higher};
        residual = f(bbgky_residual(h, v, n));
      }
    }
    csv += csv_row({f(rows[i][3]), std::to_string(k), f(rows[i][0]), f(rows[i][1]), f(rows[i][2]), residual});
  }
  ctx.files.add("marginals.csv", csv);
  ctx.results["particles"] = n;
  ctx.results["snapshots"] = slices.size();
  ctx.results["max_hermiticity"] = worst_hermiticity;
  ctx.results["max_exchange_asymmetry"] = worst_exchange;
}

void run_converge(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto ns = cfg.integers("converge.Ns");
  const auto report = convergence_study(cfg.initial_state(), cfg.potential(), ns, cfg.evolution(),
                                        [&](const ConvergenceRow& r) {
                                          ctx.log("converge: N = " + std::to_string(r.n) + " distance " +
                                                  f(r.distance) + " (" + f(std::round(r.seconds * 10) / 10) + " s)");
                                        });
  std::string csv = "N,distance,bound_sqrtN,bound_overN\n";
  json rows = json::array();
  for (const auto& r : report.rows) {
    csv += csv_row({std::to_string(r.n), f(r.distance), f(1.0 / std::sqrt(double(r.n))), f(1.0 / r.n)});
    rows.push_back({{"N", r.n}, {"distance", r.distance}, {"max_norm_drift", r.max_norm_drift},
                    {"max_relative_energy_drift", r.max_energy_drift}, {"seconds", r.seconds}});
  }
  ctx.files.add("converge.csv", csv);
  ctx.files.add("converge.gp",
                "# gnuplot converge.gp\n"
                "set datafile separator ','\n"
                "set logscale xy\n"
                "set key autotitle columnhead\n"
                "set xlabel 'N'\n"
                "set ylabel 'trace-norm distance'\n"
                "set terminal pngcairo size 800,600\n"
                "set output 'converge.png'\n"
                "plot 'converge.csv' using 1:2 with linespoints, '' using 1:3 with lines, '' using 1:4 with lines\n");
  ctx.results["t_eval"] = report.t_eval;
  ctx.results["slope"] = report.fitted_slope;
  ctx.results["fit_residual"] = report.fit_residual;
  ctx.results["degenerate"] = report.degenerate;
  ctx.results["complete"] = report.complete;
  if (!report.complete) {
    ctx.results["failure"] = report.failure;
    ctx.deferred.emplace(report.failure_category, "convergence study incomplete: " + report.failure);
  }
  ctx.results["rows"] = rows;
}

void run_correlate(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto setup = cfg.relative_setup();
  const auto times = cfg.reals("correlate.times");
  const auto report = correlation_study(cfg.potential(), times, setup);
  if (report.box_too_small)
    ctx.warn("box too small: free-run deviation " + f(report.boundary_deviation) + " in the window");
  std::string csv = "T,F,prop1_bound,supnorm_omega\n";
  for (std::size_t i = 0; i < report.times.size(); ++i)
    csv += csv_row({f(report.times[i]), f(report.f_values[i]), f(report.bounds[i]), f(report.sup_omega[i])});
  ctx.files.add("correlate.csv", csv);
  ctx.files.add("correlate.gp",
                "# gnuplot correlate.gp\n"
                "set datafile separator ','\n"
                "set logscale xy\n"
                "set key autotitle columnhead\n"
                "set xlabel 'T'\n"
                "set terminal pngcairo size 800,600\n"
                "set output 'correlate.png'\n"
                "plot 'correlate.csv' using 1:2 with linespoints, '' using 1:4 with linespoints\n");
  ctx.results["F0"] = report.f0;
  ctx.results["window"] = report.window;
  ctx.results["boundary_deviation"] = report.boundary_deviation;
  ctx.results["box_too_small"] = report.box_too_small;
  if (report.f_values.size() >= 2 && report.f_values.front() > 0.0)
    ctx.results["ratio_last_first"] = report.f_values.back() / report.f_values.front();
}

void run_dispersion(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto setup = cfg.relative_setup();
  const auto v = cfg.potential();
  const auto fsol = solve_zero_energy(v, default_radial_grid(v));
  const auto report = dispersion_decay(fsol, cfg.reals("dispersion.times"), setup, cfg.real("dispersion.fit_lo"),
                                       cfg.real("dispersion.fit_hi"));
  if (report.box_too_small)
    ctx.warn("box too small: free-run deviation " + f(report.boundary_deviation) + " in the window");
  std::string csv = "t,supnorm\n";
  for (std::size_t i = 0; i < report.times.size(); ++i) csv += csv_row({f(report.times[i]), f(report.sup_norms[i])});
  ctx.files.add("dispersion.csv", csv);
  ctx.files.add("dispersion.gp",
                "# gnuplot dispersion.gp\n"
                "set datafile separator ','\n"
                "set logscale xy\n"
                "set key autotitle columnhead\n"
                "set xlabel 't'\n"
                "set ylabel 'sup |omega_t| on the window'\n"
                "set terminal pngcairo size 800,600\n"
                "set output 'dispersion.png'\n"
                "plot 'dispersion.csv' using 1:2 with linespoints\n");
  ctx.results["exponent"] = report.exponent;
  ctx.results["fit_residual"] = report.fit_residual;
  ctx.results["boundary_deviation"] = report.boundary_deviation;
  ctx.results["box_too_small"] = report.box_too_small;
}

void finish(Context& ctx, const std::chrono::steady_clock::time_point& start, RunSummary& summary) {
  ctx.files.add("resolved.cfg", serialize(ctx.cfg));
  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest;
  manifest["program"] = "effdyn";
  manifest["version"] = kVersion;
  manifest["libraries"] = {{"fftw", fft_library_version()},
                           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                         "." + std::to_string(EIGEN_MINOR_VERSION)}};
  manifest["subcommand"] = std::string(to_string(ctx.cfg.command));
  manifest["config_hash"] = "fnv1a64:" + fnv1a_hex(ctx.opts.raw_config);
  manifest["resolved_config_hash"] = "fnv1a64:" + fnv1a_hex(serialize(ctx.cfg));
  manifest["seed"] = ctx.cfg.integer("seed");
  manifest["threads"] = fft_threads();
  manifest["wall_seconds"] = summary.wall_seconds;
  manifest["results"] = ctx.results;
  manifest["warnings"] = ctx.warnings;
  auto names = ctx.files.names();
  names.push_back("manifest.json");
  manifest["files"] = names;
  ctx.files.add("manifest.json", manifest.dump(2) + "\n");
  ctx.files.commit(ctx.opts.out_dir);
  summary.files = names;
  summary.warnings = ctx.warnings;
}

}  // namespace

std::string encode_field(std::span<const cplx> values) {
  std::string out;
  out.reserve(values.size() * 16);
  for (const auto& z : values) {
    put_f64(out, z.real());
    put_f64(out, z.imag());
  }
  return out;
}

std::string encode_nbody(const NBodyState& psi, double t) {
  std::string out;
  put_u64(out, psi.grid().size());
  put_u64(out, static_cast<std::uint64_t>(psi.particles()));
  put_f64(out, psi.grid().extent());
  put_f64(out, t);
  return out + encode_field(psi.amplitudes());
}

DecodedNBody decode_nbody(std::string_view bytes) {
  require(bytes.size() >= 32, ErrorCategory::structural, "snapshot shorter than its header");
  const auto m = get_u64(bytes, 0), n = get_u64(bytes, 8);
  const double l = get_f64(bytes, 16), t = get_f64(bytes, 24);
  require(m >= 1 && n >= 1 && n <= 64, ErrorCategory::structural, "snapshot header has bad M or N");
  const std::size_t count = tensor_size(static_cast<std::size_t>(m), static_cast<int>(n));
  require(bytes.size() == 32 + 16 * count, ErrorCategory::structural,
          "snapshot size " + std::to_string(bytes.size()) + " does not match header (M=" + std::to_string(m) +
              ", N=" + std::to_string(n) + ")");
  std::vector<cplx> amps(count);
  for (std::size_t i = 0; i < count; ++i) amps[i] = {get_f64(bytes, 32 + 16 * i), get_f64(bytes, 40 + 16 * i)};
  return {NBodyState(UniformGrid(l, static_cast<std::size_t>(m)), static_cast<int>(n), std::move(amps)), t};
}

int exit_code(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::parse: return 3;
    case ErrorCategory::io: return 4;
    case ErrorCategory::domain: return 5;
    case ErrorCategory::structural: return 6;
    case ErrorCategory::resource: return 7;
    case ErrorCategory::numerical: return 8;
  }
  return 1;
}

RunSummary run(const RunConfig& cfg, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  check_output_dir(opts.out_dir);
  set_fft_threads(opts.threads);
  Context ctx{cfg, opts, {}, json::object(), {}, std::nullopt};
  RunSummary summary;
  switch (cfg.command) {
    case Command::scattering: run_scattering(ctx); break;
    case Command::hartree: run_hartree(ctx); break;
    case Command::gp: run_gp(ctx); break;
    case Command::nbody: run_nbody(ctx); break;
    case Command::marginals: run_marginals(ctx); break;
    case Command::converge: run_converge(ctx); break;
    case Command::correlate: run_correlate(ctx); break;
    case Command::dispersion: run_dispersion(ctx); break;
  }
  finish(ctx, start, summary);
  if (ctx.deferred) fail(ctx.deferred->first, ctx.deferred->second);
  return summary;
}

}  // namespace effdyn
