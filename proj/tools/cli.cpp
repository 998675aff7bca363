#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "hps/errors.hpp"
#include "hps/oracle.hpp"
#include "hps/problems.hpp"
#include "hps/report_io.hpp"

namespace hps::cli {

namespace {

using ordered_json = nlohmann::ordered_json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kOracleTolerance = 1e-10;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& field) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    T v{};
    auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw ConfigError(field + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(field + ": empty list");
  return out;
}

std::size_t parse_bytes(const std::string& text) {
  std::string t = trim(text);
  std::size_t scale = 1;
  if (!t.empty()) {
    switch (std::toupper(static_cast<unsigned char>(t.back()))) {
      case 'K': scale = std::size_t{1} << 10; break;
      case 'M': scale = std::size_t{1} << 20; break;
      case 'G': scale = std::size_t{1} << 30; break;
      default: break;
    }
    if (scale != 1) t.pop_back();
  }
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || v <= 0.0)
    throw ConfigError("memory-budget: cannot parse '" + text + "'");
  return static_cast<std::size_t>(v * static_cast<double>(scale));
}

bool strictly_increasing(const std::vector<std::size_t>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

bool is_elliptic(const std::string& name) {
  const auto& e = elliptic_problems();
  return std::find(e.begin(), e.end(), name) != e.end();
}

bool is_parabolic(const std::string& name) {
  const auto& e = parabolic_problems();
  return std::find(e.begin(), e.end(), name) != e.end();
}

void validate(const RunConfig& cfg) {
  static const std::vector<std::string> modes = {"solve", "sweep", "bench", "timestep",
                                                 "oracle-check"};
  if (std::find(modes.begin(), modes.end(), cfg.mode) == modes.end())
    throw ConfigError("mode: unknown mode '" + cfg.mode + "'");
  if (cfg.mode == "timestep") {
    if (!is_parabolic(cfg.problem))
      throw ConfigError("problem: '" + cfg.problem + "' is not a time-dependent problem");
  } else if (!is_elliptic(cfg.problem)) {
    throw ConfigError("problem: unknown problem '" + cfg.problem + "'");
  }
  if (cfg.dim != 2 && cfg.dim != 3) throw ConfigError("dim: must be 2 or 3");
  if (cfg.boxes.empty() || cfg.p.empty()) throw ConfigError("boxes and p must be nonempty");
  if (cfg.corner_mode != "auto") parse_corner_mode(cfg.corner_mode);
  if (cfg.ordering != "min-degree" && cfg.ordering != "natural")
    throw ConfigError("ordering: expected min-degree or natural");
  if (cfg.workers == 0 || cfg.batch_size == 0 || cfg.resident_limit == 0)
    throw ConfigError("workers, batch-size and resident-limit must be positive");
  if (cfg.domain_lo.size() != cfg.domain_hi.size())
    throw ConfigError("domain-lo and domain-hi must have the same length");
  if (!cfg.domain_lo.empty() && cfg.domain_lo.size() != cfg.dim)
    throw ConfigError("domain bounds must have one entry per dimension");
  if (cfg.mode == "sweep" || cfg.mode == "bench") {
    if (!strictly_increasing(cfg.boxes)) throw ConfigError("boxes: sweep list must be strictly increasing");
    if (!strictly_increasing(cfg.p)) throw ConfigError("p: sweep list must be strictly increasing");
    if (cfg.mode == "sweep" && cfg.boxes.size() > 1 && cfg.p.size() > 1)
      throw ConfigError("sweep varies either boxes or p, not both");
    if (cfg.trials == 0) throw ConfigError("trials: must be positive");
  } else {
    if (cfg.p.size() != 1) throw ConfigError("p: expected a single value in " + cfg.mode + " mode");
    if (cfg.boxes.size() != 1 && cfg.boxes.size() != cfg.dim)
      throw ConfigError("boxes: expected 1 or " + std::to_string(cfg.dim) + " values");
  }
  if (cfg.mode == "timestep") {
    if (!(cfg.dt > 0.0)) throw ConfigError("dt: must be positive");
    if (cfg.steps == 0) throw ConfigError("steps: must be positive");
  }
}

std::vector<std::size_t> boxes_per_dim(const std::vector<std::size_t>& boxes, std::size_t dim) {
  return boxes.size() == 1 ? std::vector<std::size_t>(dim, boxes[0]) : boxes;
}

ProblemSpec problem_for(const RunConfig& cfg) {
  ProblemParams params{cfg.kappa, cfg.amplitude, cfg.frequency, cfg.dim};
  if (cfg.domain_lo.empty()) return make_problem(cfg.problem, params);
  DomainBox box{cfg.domain_lo, cfg.domain_hi};
  if (cfg.problem == "poisson_green") return poisson_green(box);
  if (cfg.problem == "helmholtz_green") return helmholtz_green(box, cfg.kappa);
  if (cfg.problem == "gravity_helmholtz") return gravity_helmholtz(box, cfg.kappa);
  throw ConfigError("domain: " + cfg.problem + " is posed on a fixed reference box");
}

CornerMode corner_mode_for(const RunConfig& cfg, bool cross_terms) {
  if (cfg.corner_mode == "auto")
    return cross_terms ? CornerMode::LegendreFaces : CornerMode::DropCorners;
  return parse_corner_mode(cfg.corner_mode);
}

BatchSchedule schedule_for(const RunConfig& cfg) {
  BatchSchedule s;
  s.workers = cfg.workers;
  s.batch_size = cfg.batch_size;
  s.resident_limit = cfg.resident_limit;
  s.memory_budget = cfg.memory_budget;
  s.cache_leaves = cfg.cache_leaves;
  return s;
}

BuildOptions options_for(const RunConfig& cfg) {
  BuildOptions o;
  o.factor.ordering = cfg.ordering == "natural" ? Ordering::Natural : Ordering::MinimumDegree;
  return o;
}

std::shared_ptr<const Discretization> make_mesh(const DomainBox& box, std::vector<std::size_t> boxes,
                                                std::size_t p, CornerMode mode) {
  return std::make_shared<const Discretization>(build_discretization(box, {std::move(boxes), p, mode}));
}

ordered_json problem_json(const RunConfig& cfg) {
  return {{"name", cfg.problem},
          {"kappa", cfg.kappa},
          {"amplitude", cfg.amplitude},
          {"frequency", cfg.frequency}};
}

ordered_json schedule_json(const InterfaceSystem& sys) {
  const auto& s = sys.schedule();
  const auto& st = sys.schedule_stats;
  return {{"workers", s.workers},           {"batch_size", s.batch_size},
          {"resident_limit", s.resident_limit}, {"memory_budget", s.memory_budget},
          {"peak_bytes", st.peak_bytes},     {"batches", st.batches},
          {"flushes", st.flushes}};
}

ordered_json backend_json(const InterfaceSystem& sys) {
  const FactorStats st = sys.factorization->stats();
  return {{"n", st.n},
          {"nnz_matrix", st.nnz_matrix},
          {"nnz_factors", st.nnz_factors},
          {"fronts", st.fronts},
          {"max_front", st.max_front},
          {"delayed_pivots", st.delayed_pivots}};
}

void prepare_out(const std::string& dir) { std::filesystem::create_directories(dir); }
std::string out_path(const RunConfig& cfg, const std::string& file) {
  return (std::filesystem::path(cfg.out) / file).string();
}

struct SolveResult {
  std::shared_ptr<const Discretization> disc;
  SolveReport report;
  ordered_json json;
  LoadData load;
};

SolveResult solve_once(const RunConfig& cfg, const ProblemSpec& spec,
                       const std::vector<std::size_t>& boxes, std::size_t p) {
  SolveResult r;
  r.disc = make_mesh(spec.domain, boxes_per_dim(boxes, cfg.dim), p,
                     corner_mode_for(cfg, spec.coeffs.cross_terms));
  Solver solver(r.disc, spec.coeffs, schedule_for(cfg), options_for(cfg));
  r.load = sample_load(*r.disc, spec.f, spec.g);
  r.report = solver.solve(r.load);
  r.json = {{"schema_version", kSchemaVersion},
            {"mode", cfg.mode},
            {"problem", problem_json(cfg)},
            {"mesh", mesh_summary(*r.disc, solver.system().size())},
            {"schedule", schedule_json(solver.system())},
            {"backend", backend_json(solver.system())},
            {"wall_times", to_json(r.report.wall_times)},
            {"residual", r.report.residual},
            {"factorizations", solver.system().factorizations}};
  if (spec.has_exact()) r.json["rel_error"] = relative_l2_error(*r.disc, r.report.u, spec.exact);
  return r;
}

int mode_solve(const RunConfig& cfg, std::ostream& out) {
  const ProblemSpec spec = problem_for(cfg);
  SolveResult r = solve_once(cfg, spec, cfg.boxes, cfg.p[0]);
  int code = kSuccess;
  if (cfg.oracle || cfg.mode == "oracle-check") {
    const auto ref = dense_full_system_oracle(*r.disc, spec.coeffs, r.load);
    const double diff = relative_l2_error(r.report.u, ref);
    r.json["oracle_rel_diff"] = diff;
    if (cfg.mode == "oracle-check") {
      r.json["oracle_tolerance"] = kOracleTolerance;
      r.json["oracle_pass"] = diff <= kOracleTolerance;
      if (!(diff <= kOracleTolerance)) code = kNumericFailure;
    }
  }
  prepare_out(cfg.out);
  write_json(out_path(cfg, "report.json"), r.json);
  if (cfg.nodes) write_csv(out_path(cfg, "nodes.csv"), node_table(*r.disc, r.report.u));
  out << cfg.problem << ": nodes " << r.disc->node_count() << ", interface "
      << r.json["mesh"]["interface_dofs"].get<std::size_t>() << ", residual "
      << format_double(r.report.residual);
  if (r.json.contains("rel_error")) out << ", rel_error " << format_double(r.json["rel_error"].get<double>());
  if (r.json.contains("oracle_rel_diff"))
    out << ", oracle_rel_diff " << format_double(r.json["oracle_rel_diff"].get<double>());
  out << '\n';
  return code;
}

const std::vector<std::string> kPhaseColumns = {"dtn_assembly", "t_assembly", "factorize",
                                                "load_reduction", "interface_solve", "interior_solve"};

std::vector<double> phase_values(const PhaseTimes& t) {
  return {t.dtn_assembly,    t.t_assembly,      t.factorize,
          t.load_reduction, t.interface_solve, t.interior_solve};
}

int mode_sweep(const RunConfig& cfg, std::ostream& out) {
  const ProblemSpec spec = problem_for(cfg);
  const bool h_mode = cfg.boxes.size() > 1;
  struct Run {
    std::size_t boxes, p;
    SolveResult result;
  };
  std::vector<Run> runs;
  for (std::size_t b : cfg.boxes)
    for (std::size_t p : cfg.p) runs.push_back({b, p, solve_once(cfg, spec, {b}, p)});

  // Without a closed-form solution, compare against an over-resolved
  // solution on the finest box count.
  std::shared_ptr<const Discretization> ref_disc;
  std::vector<double> ref_u;
  if (!spec.has_exact()) {
    const std::size_t pref = cfg.p.back() + cfg.reference_p_offset;
    ref_disc = make_mesh(spec.domain, boxes_per_dim({cfg.boxes.back()}, cfg.dim), pref,
                         CornerMode::LegendreFaces);
    Solver ref(ref_disc, spec.coeffs, schedule_for(cfg), options_for(cfg));
    ref_u = ref.solve(spec.f, spec.g).u;
  }

  Table table;
  table.columns = {"p", "boxes", "N_total", "N_interface", "rel_error"};
  for (const auto& c : kPhaseColumns) table.columns.push_back(c);
  table.columns.push_back("order");
  ordered_json rows = ordered_json::array();
  double prev_err = kNaN;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    auto& run = runs[k];
    const Discretization& disc = *run.result.disc;
    double err;
    if (spec.has_exact()) {
      err = run.result.json["rel_error"].get<double>();
    } else {
      const auto ref = interpolate_solution(*ref_disc, ref_u, disc.coords);
      err = relative_l2_error(run.result.report.u, ref);
    }
    double order = kNaN;
    if (k > 0) {
      const double step = h_mode ? std::log(static_cast<double>(run.boxes) / static_cast<double>(runs[k - 1].boxes))
                                 : std::log(static_cast<double>(run.p) / static_cast<double>(runs[k - 1].p));
      order = std::log(prev_err / err) / step;
    }
    prev_err = err;
    std::vector<double> row = {static_cast<double>(run.p), static_cast<double>(run.boxes),
                               static_cast<double>(disc.node_count()),
                               static_cast<double>(disc.dirichlet_begin - disc.interface_begin), err};
    for (double v : phase_values(run.result.report.wall_times)) row.push_back(v);
    row.push_back(order);
    table.rows.push_back(row);
    ordered_json jr = {{"p", run.p},
                       {"boxes", run.boxes},
                       {"N_total", disc.node_count()},
                       {"N_interface", disc.dirichlet_begin - disc.interface_begin},
                       {"rel_error", err},
                       {"wall_times", to_json(run.result.report.wall_times)}};
    if (!std::isnan(order)) jr["order"] = order;
    rows.push_back(jr);
    out << "p " << run.p << " boxes " << run.boxes << " rel_error " << format_double(err);
    if (!std::isnan(order)) out << " order " << format_double(order);
    out << '\n';
  }
  prepare_out(cfg.out);
  write_csv(out_path(cfg, "sweep.csv"), table);
  ordered_json j = {{"schema_version", kSchemaVersion},
                    {"mode", cfg.mode},
                    {"problem", problem_json(cfg)},
                    {"variable", h_mode ? "h" : "p"},
                    {"reference", spec.has_exact() ? "exact" : "over-resolved"},
                    {"rows", rows}};
  write_json(out_path(cfg, "report.json"), j);
  return kSuccess;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int mode_bench(const RunConfig& cfg, std::ostream& out) {
  const ProblemSpec spec = problem_for(cfg);
  Table table;
  table.columns = {"N", "p", "boxes", "N_interface"};
  for (const auto& c : kPhaseColumns) table.columns.push_back(c + "_time");
  ordered_json rows = ordered_json::array();
  for (std::size_t b : cfg.boxes) {
    for (std::size_t p : cfg.p) {
      std::vector<std::vector<double>> samples(kPhaseColumns.size());
      std::size_t nodes = 0, nif = 0;
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        SolveResult r = solve_once(cfg, spec, {b}, p);
        nodes = r.disc->node_count();
        nif = r.disc->dirichlet_begin - r.disc->interface_begin;
        const auto v = phase_values(r.report.wall_times);
        for (std::size_t k = 0; k < v.size(); ++k) samples[k].push_back(v[k]);
      }
      std::vector<double> row = {static_cast<double>(nodes), static_cast<double>(p),
                                 static_cast<double>(b), static_cast<double>(nif)};
      ordered_json jr = {{"N", nodes}, {"p", p}, {"boxes", b}, {"N_interface", nif}};
      for (std::size_t k = 0; k < samples.size(); ++k) {
        row.push_back(median(samples[k]));
        jr[kPhaseColumns[k] + "_time"] = row.back();
      }
      table.rows.push_back(row);
      rows.push_back(jr);
      out << "N " << nodes << " p " << p << " dtn_assembly " << format_double(row[4])
          << " factorize " << format_double(row[6]) << '\n';
    }
  }
  prepare_out(cfg.out);
  write_csv(out_path(cfg, "bench.csv"), table);
  write_json(out_path(cfg, "report.json"), {{"schema_version", kSchemaVersion},
                                            {"mode", cfg.mode},
                                            {"problem", problem_json(cfg)},
                                            {"trials", cfg.trials},
                                            {"statistic", "median"},
                                            {"rows", rows}});
  return kSuccess;
}

int mode_timestep(const RunConfig& cfg, std::ostream& out) {
  const ParabolicSpec spec = make_parabolic(cfg.problem, cfg.dim);
  if (cfg.dt_halvings > 0 && !spec.exact)
    throw ConfigError("dt-halvings: " + cfg.problem + " has no exact solution");
  auto disc = make_mesh(spec.domain, boxes_per_dim(cfg.boxes, cfg.dim), cfg.p[0],
                        corner_mode_for(cfg, false));
  const BatchSchedule sched = schedule_for(cfg);
  const double t_end = cfg.dt * static_cast<double>(cfg.steps);
  const Trajectory traj = crank_nicolson_run(disc, spec, {cfg.dt, t_end, cfg.snapshot_stride}, sched);

  prepare_out(cfg.out);
  ordered_json snaps = ordered_json::array();
  auto write_snapshot = [&](std::size_t k, double t, const std::vector<double>& u) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(5) << std::setfill('0') << k << ".csv";
    write_csv(out_path(cfg, name.str()), node_table(*disc, u));
    ordered_json s = {{"t", t}, {"file", name.str()}};
    if (spec.name == "convection_diffusion") {
      const auto c = upper_mass_center(*disc, u);
      s["upper_mass_center"] = c;
      s["angle"] = std::atan2(c[1], c[0]);
    }
    snaps.push_back(s);
  };
  if (traj.snapshots.empty()) {
    write_snapshot(traj.steps, t_end, traj.final);
  } else {
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k)
      write_snapshot(k, traj.times[k], traj.snapshots[k]);
  }

  ordered_json events = ordered_json::array();
  std::size_t factorize_events = 0;
  for (const auto& e : traj.log) {
    events.push_back({{"phase", e.phase}, {"seconds", e.seconds}});
    factorize_events += e.phase == "factorize";
  }
  ordered_json j = {{"schema_version", kSchemaVersion},
                    {"mode", cfg.mode},
                    {"problem", {{"name", cfg.problem}, {"diffusivity", spec.diffusivity}}},
                    {"mesh", mesh_summary(*disc, disc->dirichlet_begin - disc->interface_begin)},
                    {"dt", cfg.dt},
                    {"steps", traj.steps},
                    {"t_end", t_end},
                    {"factorizations", traj.factorizations},
                    {"factorize_events", factorize_events},
                    {"snapshots", snaps},
                    {"events", events}};
  if (traj.final_error >= 0.0) j["final_error"] = traj.final_error;
  out << cfg.problem << ": " << traj.steps << " steps, " << factorize_events << " factorization";
  if (traj.final_error >= 0.0) out << ", final_error " << format_double(traj.final_error);
  out << '\n';

  if (cfg.dt_halvings > 0) {
    ordered_json study = ordered_json::array();
    study.push_back({{"dt", cfg.dt}, {"final_error", traj.final_error}});
    double prev = traj.final_error;
    for (std::size_t h = 1; h <= cfg.dt_halvings; ++h) {
      const double dt = cfg.dt / std::ldexp(1.0, static_cast<int>(h));
      const auto run = crank_nicolson_run(disc, spec, {dt, t_end, 0}, sched);
      const double order = std::log2(prev / run.final_error);
      study.push_back({{"dt", dt},
                       {"final_error", run.final_error},
                       {"factorizations", run.factorizations},
                       {"temporal_order", order}});
      out << "dt " << format_double(dt) << " final_error " << format_double(run.final_error)
          << " temporal_order " << format_double(order) << '\n';
      prev = run.final_error;
    }
    j["dt_study"] = study;
  }
  write_json(out_path(cfg, "timestep.json"), j);
  return kSuccess;
}

}  // namespace

std::vector<ConfigEntry> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::vector<ConfigEntry> entries;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(n) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(path + ":" + std::to_string(n) + ": empty key or value");
    entries.push_back({key, value, n});
  }
  return entries;
}

int run_config(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  if (cfg.mode == "solve" || cfg.mode == "oracle-check") return mode_solve(cfg, out);
  if (cfg.mode == "sweep") return mode_sweep(cfg, out);
  if (cfg.mode == "bench") return mode_bench(cfg, out);
  return mode_timestep(cfg, out);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-level HPS solver for elliptic boundary value problems"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  RunConfig cfg;
  std::string boxes = "2", p = "8", lo, hi, budget, config_path;
  app.add_option("--config", config_path, "flat key = value file; flags override it");
  app.add_option("--mode", cfg.mode, "solve, sweep, bench, timestep or oracle-check");
  app.add_option("--problem", cfg.problem, "problem name");
  app.add_option("--kappa", cfg.kappa, "wavenumber");
  app.add_option("--amplitude", cfg.amplitude, "curved domain amplitude");
  app.add_option("--frequency", cfg.frequency, "curved domain frequency");
  app.add_option("--dim", cfg.dim, "2 or 3");
  app.add_option("--domain-lo", lo, "comma-separated lower corner");
  app.add_option("--domain-hi", hi, "comma-separated upper corner");
  app.add_option("--boxes", boxes, "boxes per axis, or a list of uniform counts in sweeps");
  app.add_option("--p", p, "Chebyshev points per axis, or a list in sweeps");
  app.add_option("--corner-mode", cfg.corner_mode, "auto, drop-corners or legendre-faces");
  app.add_option("--ordering", cfg.ordering, "min-degree or natural");
  app.add_option("--workers", cfg.workers);
  app.add_option("--batch-size", cfg.batch_size);
  app.add_option("--resident-limit", cfg.resident_limit);
  app.add_option("--memory-budget", budget, "bytes, optionally with K, M or G suffix");
  app.add_flag("--cache-leaves", cfg.cache_leaves);
  app.add_option("--out", cfg.out, "output directory");
  app.add_flag("--oracle", cfg.oracle, "compare against the dense full-system solve");
  app.add_flag("--nodes", cfg.nodes, "write the node-value table");
  app.add_option("--dt", cfg.dt);
  app.add_option("--steps", cfg.steps);
  app.add_option("--snapshot-stride", cfg.snapshot_stride);
  app.add_option("--dt-halvings", cfg.dt_halvings);
  app.add_option("--trials", cfg.trials);
  app.add_option("--reference-p-offset", cfg.reference_p_offset);

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);  // CLI11 wants reversed order
    for (int i = 1; i < argc; ++i) {
      const std::string a = argv[i];
      if (a == "--config" && i + 1 < argc) config_path = argv[i + 1];
      else if (a.rfind("--config=", 0) == 0) config_path = a.substr(9);
    }
    if (!config_path.empty()) {
      for (const auto& e : read_config_file(config_path)) {
        if (e.key == "config" || app.get_option_no_throw("--" + e.key) == nullptr)
          throw ConfigError(config_path + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "'");
        args.push_back("--" + e.key + "=" + e.value);  // lowest precedence: parsed first
      }
    }
    app.parse(args);
    cfg.boxes = parse_list<std::size_t>(boxes, "boxes");
    cfg.p = parse_list<std::size_t>(p, "p");
    if (!lo.empty()) cfg.domain_lo = parse_list<double>(lo, "domain-lo");
    if (!hi.empty()) cfg.domain_hi = parse_list<double>(hi, "domain-hi");
    if (!budget.empty()) cfg.memory_budget = parse_bytes(budget);
    return run_config(cfg, out);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const SingularLeafError& e) {
    err << "numeric failure on leaf " << e.leaf() << ": " << e.what() << '\n';
    return kNumericFailure;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kNumericFailure;
  }
}

}  // namespace hps::cli
