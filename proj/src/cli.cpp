#include "matschrod/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "matschrod/config.hpp"
#include "matschrod/report_io.hpp"

namespace matschrod::cli {

namespace {

using nlohmann::json;

struct Invocation {
  std::string command;
  json doc = json::object();
  std::optional<std::string> gallery_name;
  std::string gallery_check;
  bool gallery_list = false;
  std::string help;
};

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config file " + path + " is not valid JSON");
  if (!doc.is_object()) throw ConfigError("config file " + path + " must hold a JSON object");
  return doc;
}

// Extras left over by CLI11 are the dotted overrides: "--a.b=v" or "--a.b v".
std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() <= 2) throw ConfigError("unexpected argument '" + tok + "'");
    const std::string body = tok.substr(2);
    const std::size_t eq = body.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(body.substr(0, eq), body.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw ConfigError("override --" + body + " has no value");
      out.emplace_back(body, extras[++i]);
    }
  }
  return out;
}

Invocation parse_command_line(const std::vector<std::string>& args) {
  CLI::App app{"Discrete matrix Schrodinger operators: assembly, spectra, semigroup probes"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  Invocation inv;

  std::vector<CLI::App*> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"assemble", "assemble the operator and report its metadata"},
      {"spectrum", "lowest k eigenpairs of -A"},
      {"evolve", "propagate the initial state and run the L^p probes"},
      {"verify", "run every applicable check and emit verdicts"},
      {"gallery", "list or check the built-in problems"},
  };
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->allow_extras();
    sub->add_option("--config", config_path, "JSON experiment config");
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--out", out_dir, "output directory");
    subs.push_back(sub);
  }
  CLI::App* gallery = subs.back();
  gallery->add_flag("--list", inv.gallery_list, "list the catalog");
  gallery->add_option("--name", inv.gallery_name, "catalog entry");
  gallery->add_option("--check", inv.gallery_check, "merge | spectrum | sandwich | continuity");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    inv.help = app.help();
    return inv;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string("usage: ") + e.what());
  }

  for (CLI::App* sub : subs) {
    if (sub->parsed()) {
      inv.command = sub->get_name();
      if (!config_path.empty()) inv.doc = load_config_file(config_path);
      for (const auto& [key, value] : parse_overrides(sub->remaining())) apply_override(inv.doc, key, value);
    }
  }
  if (seed) inv.doc["seed"] = *seed;
  if (out_dir) inv.doc["output"]["dir"] = *out_dir;
  return inv;
}

VectorState random_state(const GridSpec& g, std::mt19937_64& rng, double amplitude, bool nonnegative) {
  std::uniform_real_distribution<double> dist(nonnegative ? 0.0 : -amplitude, amplitude);
  Vector values(static_cast<Eigen::Index>(g.state_size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) values[i] = dist(rng);
  return VectorState(g, std::move(values));
}

VectorState initial_state(const ExperimentConfig& c, const GridSpec& g) {
  const auto& init = c.initial;
  Point center = Eigen::Map<const Vector>(init.center.data(), static_cast<Eigen::Index>(init.center.size()));
  if (init.kind == "bump") return bump_state(g, center, init.scale, init.component);
  if (init.kind == "random") {
    std::mt19937_64 rng(c.seed);
    return random_state(g, rng, 1.0, true);
  }
  // impulse: the node closest to the center
  std::size_t best = 0;
  double best_dist = kInfinity;
  for (std::size_t a = 0; a < g.node_count(); ++a) {
    const double dist = (g.coordinates(a) - center).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = a;
    }
  }
  VectorState f(g);
  f.at(best, init.component) = 1.0;
  return f;
}

// Like the configured propagator but never Crank-Nicolson, which the
// positivity probes reject.
PropagatorConfig positivity_config(const ExperimentConfig& c, std::size_t dim) {
  PropagatorConfig pc = c.propagator;
  if (pc.method == PropagationMethod::kCrankNicolson) {
    pc.method = dim <= pc.dense_limit ? PropagationMethod::kExactDense : PropagationMethod::kLanczosExpmv;
  }
  return pc;
}

struct Context {
  ExperimentConfig config;
  fs::path out_dir;
  std::ostream& out;
};

bool want(const Context& ctx, const char* format) { return ctx.config.wants(format); }

int cmd_assemble(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const GalleryProblem problem = build_problem(c);
  const GridSpec grid = problem.grid();
  const SampledFields f = problem.sample();
  const FormAssembly form = assemble_form(f.diffusion, f.potential, grid);
  const SymmetricOperator op = assemble_operator(form);
  json stats = {{"dimension", op.dimension()},
                {"nonzeros", op.generator().nonZeros()},
                {"max_row_nonzeros", op.max_row_nonzeros()},
                {"symmetry_defect", op.symmetry_defect()},
                {"norm_bound", op.norm_bound()},
                {"spacing", grid.spacing()},
                {"cell_volume", grid.cell_volume()},
                {"eta1", f.diffusion.eta1()},
                {"eta2", f.diffusion.eta2()},
                {"diagonal_diffusion", f.diffusion.diagonal()},
                {"potential_psd", f.potential.psd()},
                {"potential_min_eigenvalue", f.potential.min_eigenvalue()},
                {"potential_off_diagonal_max", json_number(f.potential.off_diagonal_max())}};
  if (want(ctx, "json")) write_json(ctx.out_dir / "assemble.json", stats);
  ctx.out << stats.dump(2) << '\n';
  return kExitOk;
}

int cmd_spectrum(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const GalleryProblem problem = build_problem(c);
  const SampledFields f = problem.sample();
  const SymmetricOperator op = assemble_operator(assemble_form(f.diffusion, f.potential, problem.grid()));
  EigenOptions opts = c.eigen_options();
  opts.keep_vectors = false;
  const SpectrumReport r = eigen_lowest(op, c.solver.k, c.solver.tol, opts);
  if (want(ctx, "csv")) write_spectrum_csv(r, ctx.out_dir / "spectrum.csv");
  if (want(ctx, "json")) write_json(ctx.out_dir / "spectrum.json", to_json(r));
  if (want(ctx, "dat")) emit_plot_data(r, ctx.out_dir / "spectrum.dat");
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
    ctx.out << i + 1 << ' ' << format_double(r.eigenvalues[i]) << '\n';
  }
  return kExitOk;
}

int cmd_evolve(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const GalleryProblem problem = build_problem(c);
  const GridSpec grid = problem.grid();
  const SampledFields f = problem.sample();
  const SymmetricOperator op = assemble_operator(assemble_form(f.diffusion, f.potential, grid));
  const Propagator prop(op, c.propagator);
  const VectorState f0 = initial_state(c, grid);

  std::vector<double> times = c.propagator.times;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (times.empty() || times.front() != 0.0) times.insert(times.begin(), 0.0);

  ProbeReport trace;
  trace.kind = "evolve";
  std::ostringstream snaps;
  snaps << "t,node";
  for (int i = 0; i < grid.dim(); ++i) snaps << ",x" << i;
  snaps << ",component,value\n";
  for (double t : times) {
    const VectorState ft = prop.apply(f0, t);
    for (std::size_t a = 0; a < grid.node_count(); ++a) {
      const Point x = grid.coordinates(a);
      for (int j = 0; j < grid.components(); ++j) {
        snaps << format_double(t) << ',' << a;
        for (int i = 0; i < grid.dim(); ++i) snaps << ',' << format_double(x[i]);
        snaps << ',' << j << ',' << format_double(ft.at(a, j)) << '\n';
      }
    }
    for (double p : c.propagator.p_list) {
      ProbeRow row;
      row.t = t;
      row.p = p;
      row.input_norm = mixed_norm(f0, p);
      row.output_norm = mixed_norm(ft, p);
      row.ratio = row.input_norm > 0.0 ? row.output_norm / row.input_norm : 0.0;
      row.bound = 1.0;
      row.passed = true;
      trace.rows.push_back(row);
    }
  }
  if (want(ctx, "csv")) {
    write_text(ctx.out_dir / "snapshots.csv", snaps.str());
    write_probe_csv({trace}, ctx.out_dir / "probes.csv");
  }
  if (want(ctx, "dat")) emit_plot_data(trace, ctx.out_dir / "norm_trace.dat");
  for (const ProbeRow& row : trace.rows) {
    ctx.out << "t=" << format_double(row.t) << " p=" << format_double(row.p) << " ratio=" << format_double(row.ratio)
            << '\n';
  }
  return kExitOk;
}

struct VerifyState {
  std::vector<Verdict> verdicts;
  std::vector<Verdict> informational;
  std::vector<ProbeReport> probes;
  json reports = json::object();

  void add(Verdict v) { (v.guaranteed ? verdicts : informational).push_back(std::move(v)); }
  void absorb(const ProbeReport& r) {
    for (Verdict v : r.verdicts) {
      v.name = r.kind + "." + v.name;
      add(std::move(v));
    }
    probes.push_back(r);
    reports[r.kind] = to_json(r);
  }
};

std::string fmt(double x) { return format_double(x); }

void verify_form(const ExperimentConfig& c, const FormAssembly& form, const SymmetricOperator& op,
                 std::mt19937_64& rng, VerifyState& vs) {
  const GridSpec& g = form.grid();
  const bool psd = form.potential().psd();
  const double cont = std::max(form.eta2(), 1.0);
  double sym = 0.0, consistency = 0.0, accretive = kInfinity, ratio = 0.0;
  for (int trial = 0; trial < c.probes.trials; ++trial) {
    const VectorState f = random_state(g, rng, 1.0, false);
    const VectorState h = random_state(g, rng, 1.0, false);
    const double afh = eval_form(form, f, h);
    const double ahf = eval_form(form, h, f);
    const double aff = eval_form(form, f);
    const double scale = 1.0 + std::abs(afh) + std::abs(aff);
    sym = std::max(sym, std::abs(afh - ahf) / scale);
    const double matrix_value = f.values().dot(op.stiffness() * h.values());
    consistency = std::max(consistency, std::abs(afh - matrix_value) / scale);
    accretive = std::min(accretive, aff / (1.0 + std::abs(aff)));
    if (psd) ratio = std::max(ratio, continuity_ratio(form, f, h));
  }
  vs.add({"form.symmetry", sym <= 1e-12, true, "max relative |a(f,g) - a(g,f)| = " + fmt(sym)});
  vs.add({"form.matrix_consistency", consistency <= 1e-12, true,
          "max relative |a(f,g) - f^T S g| = " + fmt(consistency)});
  if (psd) {
    vs.add({"form.accretive", accretive >= -1e-12, true, "min a(f) / (1 + |a(f)|) = " + fmt(accretive)});
    vs.add({"form.continuity", ratio <= cont * (1.0 + 1e-12), true,
            "max |a(f,g)| / (|f|_a |g|_a) = " + fmt(ratio) + " <= " + fmt(cont)});
  } else {
    vs.add({"form.accretive", accretive >= -1e-12, false,
            "V is not PSD; min a(f) / (1 + |a(f)|) = " + fmt(accretive)});
  }
}

void verify_projection(const ExperimentConfig& c, const FormAssembly& form, std::mt19937_64& rng,
                       VerifyState& vs) {
  const bool guaranteed = form.diagonal_diffusion();
  if (!form.potential().psd()) {
    vs.add({"beurling_denny.skipped", true, false, "V is not PSD"});
    return;
  }
  double worst = kInfinity;
  for (int trial = 0; trial < c.probes.trials; ++trial) {
    const VectorState f = random_state(form.grid(), rng, 3.0, false);
    const double gap = beurling_denny_gap(form, f, true);
    worst = std::min(worst, gap / (1.0 + std::abs(eval_form(form, f))));
  }
  vs.add({"beurling_denny.gap_nonnegative", worst >= -1e-12, guaranteed,
          "min (a(f) - a(Pf)) / (1 + |a(f)|) = " + fmt(worst)});
  if (form.potential().symmetric()) {
    const bool predicted = form.potential().off_diagonal_max() <= 0.0;
    double cross = -kInfinity;
    for (int trial = 0; trial < c.probes.trials; ++trial) {
      const VectorState f = random_state(form.grid(), rng, 1.0, false);
      cross = std::max(cross, pos_form_cross(form, f, true) / (1.0 + std::abs(eval_form(form, f))));
    }
    vs.add({"positivity.form_cross_nonpositive", cross <= 1e-12, guaranteed && predicted,
            "max a(f+, f-) / (1 + |a(f)|) = " + fmt(cross)});
  }
}

void verify_semigroup(const ExperimentConfig& c, const SymmetricOperator& op, const PotentialField& v,
                      std::mt19937_64& rng, VerifyState& vs) {
  const GridSpec& g = op.grid();
  if (c.probes.contraction || c.probes.strong_continuity) {
    const Propagator prop(op, c.propagator);
    if (c.probes.contraction) {
      std::vector<VectorState> fs;
      for (int trial = 0; trial < c.probes.trials; ++trial) fs.push_back(random_state(g, rng, 1.0, false));
      vs.absorb(contraction_probe(prop, fs));
    }
    if (c.probes.strong_continuity) {
      const VectorState f = random_state(g, rng, 1.0, false);
      std::vector<double> ts;
      for (double t = 1.0; t >= 1.0 / 1024; t /= 4.0) ts.push_back(t);
      for (double p : c.propagator.p_list) {
        if (p > 2.0 && std::isfinite(p)) {
          ProbeReport r = strong_continuity_probe(prop, f, ts, p);
          r.kind += "_p" + fmt(p);
          vs.absorb(r);
        }
      }
    }
  }
  if (c.probes.positivity) {
    if (!op.metadata().diagonal_diffusion) {
      vs.add({"positivity.skipped", true, false, "non-diagonal Q: no positivity criterion"});
      return;
    }
    const Propagator prop(op, positivity_config(c, op.dimension()));
    const bool predicted = v.off_diagonal_max() <= 0.0;
    std::vector<double> ts = c.propagator.times;
    ts.erase(std::remove(ts.begin(), ts.end(), 0.0), ts.end());
    if (ts.empty()) ts = {0.01, 0.1, 1.0};
    if (predicted) {
      std::vector<VectorState> fs;
      for (int trial = 0; trial < c.probes.trials; ++trial) fs.push_back(random_state(g, rng, 1.0, true));
      const ProbeReport r = positivity_probe(prop, v, fs, ts);
      vs.absorb(r);
      vs.add({"positivity.dichotomy", r.label == "POSITIVE", true, "predicted POSITIVE, measured " + r.label});
    } else {
      const int m = g.components();
      int bi = 0, bj = 1;
      double best = -kInfinity;
      for (std::size_t a = 0; a < g.node_count(); ++a) {
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j)
            if (i != j && v.at(a)(i, j) > best) {
              best = v.at(a)(i, j);
              bi = i;
              bj = j;
            }
      }
      WitnessOptions wo;
      wo.t_max = std::max(1.0, *std::max_element(ts.begin(), ts.end()));
      const ProbeReport r = violation_witness(prop, v, bi, bj, wo);
      vs.absorb(r);
      vs.add({"positivity.dichotomy", r.label == "WITNESS-FOUND", true,
              "predicted NOT-POSITIVE, measured " + r.label});
    }
  }
}

int cmd_verify(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const GalleryProblem problem = build_problem(c);
  const GridSpec grid = problem.grid();
  const SampledFields f = problem.sample();
  const FormAssembly form = assemble_form(f.diffusion, f.potential, grid);
  const SymmetricOperator op = assemble_operator(form);
  std::mt19937_64 rng(c.seed);
  VerifyState vs;

  vs.add({"operator.symmetric", op.symmetry_defect() == 0.0, true, "max |K_ij - K_ji| = " + fmt(op.symmetry_defect())});
  vs.add({"expected.psd", f.potential.psd() == problem.expected.psd, true,
          "min eigenvalue of V = " + fmt(f.potential.min_eigenvalue())});
  if (problem.expected.positive && f.diffusion.diagonal()) {
    const bool predicted = f.potential.off_diagonal_max() <= 0.0;
    vs.add({"expected.positive_structure", predicted == *problem.expected.positive, true,
            "max off-diagonal v_ij = " + fmt(f.potential.off_diagonal_max())});
  }

  if (c.probes.form) verify_form(c, form, op, rng, vs);
  if (c.probes.beurling_denny) verify_projection(c, form, rng, vs);
  verify_semigroup(c, op, f.potential, rng, vs);

  const EigenOptions eo = c.eigen_options();
  if (c.probes.reference_spectrum && !problem.expected.reference_spectrum.empty()) {
    const auto& ref = problem.expected.reference_spectrum;
    EigenOptions opts = eo;
    opts.keep_vectors = false;
    const SpectrumReport sr = eigen_lowest(op, std::min(ref.size(), op.dimension()), c.solver.tol, opts);
    double worst = 0.0;
    for (std::size_t n = 0; n < sr.eigenvalues.size(); ++n) {
      worst = std::max(worst, std::abs(sr.eigenvalues[n] - ref[n]) / std::abs(ref[n]));
    }
    vs.add({"spectrum.reference", worst <= problem.expected.reference_rel_tol, true,
            "max relative deviation = " + fmt(worst) + " <= " + fmt(problem.expected.reference_rel_tol)});
    vs.reports["spectrum"] = to_json(sr);
    if (want(ctx, "csv")) write_spectrum_csv(sr, ctx.out_dir / "spectrum.csv");
    if (want(ctx, "dat")) emit_plot_data(sr, ctx.out_dir / "spectrum.dat");
  }
  if (c.probes.sandwich && f.potential.psd() && f.potential.symmetric()) {
    const SandwichReport sr = sandwich_check(f.diffusion, f.potential, grid, c.solver.k, eo);
    vs.add({"sandwich.ordering", sr.passed, true,
            "max(lower - lambda) = " + fmt(sr.max_lower_violation) +
                ", max(lambda - upper) = " + fmt(sr.max_upper_violation)});
    vs.reports["sandwich"] = to_json(sr);
    if (want(ctx, "dat")) emit_plot_data(sr, ctx.out_dir / "sandwich.dat");
  }
  if (c.probes.merge && problem.expected.decomposition) {
    const MergeReport mr = spectrum_merge_check(problem, c.solver.k, 1e-8, eo);
    vs.add({"merge.block_spectra", mr.passed, true, "max deviation = " + fmt(mr.max_deviation)});
    vs.reports["merge"] = to_json(mr);
    if (want(ctx, "csv")) write_merge_csv(mr, ctx.out_dir / "merge.csv");
  }

  bool all = true;
  json verdicts = json::array(), info = json::array();
  for (const Verdict& v : vs.verdicts) {
    all = all && v.passed;
    verdicts.push_back(to_json(v));
  }
  for (const Verdict& v : vs.informational) info.push_back(to_json(v));
  const json doc = {{"problem", problem.name},
                    {"passed", all},
                    {"verdicts", verdicts},
                    {"informational", info},
                    {"reports", vs.reports}};
  if (want(ctx, "json")) write_json(ctx.out_dir / "verdicts.json", doc);
  if (want(ctx, "csv")) write_probe_csv(vs.probes, ctx.out_dir / "probes.csv");
  if (want(ctx, "dat")) {
    for (const ProbeReport& r : vs.probes) {
      if (r.kind == "contraction") emit_plot_data(r, ctx.out_dir / "norm_trace.dat");
    }
  }
  for (const Verdict& v : vs.verdicts) ctx.out << (v.passed ? "PASS " : "FAIL ") << v.name << ": " << v.detail << '\n';
  for (const Verdict& v : vs.informational) ctx.out << "INFO " << v.name << ": " << v.detail << '\n';
  return all ? kExitOk : kExitVerdictFailed;
}

json gallery_grid_defaults(const std::string& name) {
  if (name == "harmonic_oscillator") return {{"d", 1}, {"L", 10.0}, {"N", 2000}, {"m", 1}};
  if (name == "degenerate_counterexample") return {{"d", 1}, {"L", 10.0}, {"N", 500}, {"m", 2}};
  return {{"d", 1}, {"L", 10.0}, {"N", 500}, {"m", 2}};
}

int cmd_gallery_check(Context& ctx, const std::string& name, std::string check) {
  if (name == "antisymmetric_continuity") {
    if (check.empty()) check = "continuity";
    if (check != "continuity") throw ConfigError("antisymmetric_continuity only supports --check continuity");
    const std::vector<ContinuityDemoRow> rows = antisymmetric_continuity_demo({1, 5, 10, 50, 100});
    bool increasing = true;
    for (std::size_t i = 1; i < rows.size(); ++i) increasing = increasing && rows[i].ratio > rows[i - 1].ratio;
    const double growth = rows[4].ratio / rows[2].ratio;
    json table = json::array();
    std::ostringstream csv;
    csv << "n,cross,signed_cross,gradient,l2,ratio,halving_disagreement\n";
    for (const auto& r : rows) {
      table.push_back({{"n", r.n}, {"ratio", r.ratio}, {"cross", r.cross}, {"signed_cross", r.signed_cross},
                       {"halving_disagreement", r.halving_disagreement}});
      csv << r.n << ',' << fmt(r.cross) << ',' << fmt(r.signed_cross) << ',' << fmt(r.gradient) << ',' << fmt(r.l2)
          << ',' << fmt(r.ratio) << ',' << fmt(r.halving_disagreement) << '\n';
      ctx.out << "n=" << r.n << " r_n=" << fmt(r.ratio) << '\n';
    }
    const bool passed = increasing && growth >= 1.3;
    const json doc = {{"name", name},
                      {"check", check},
                      {"passed", passed},
                      {"verdicts",
                       json::array({to_json(Verdict{"continuity.increasing", increasing, true, ""}),
                                    to_json(Verdict{"continuity.growth", growth >= 1.3, true,
                                                    "r_100 / r_10 = " + fmt(growth)})})},
                      {"rows", table}};
    if (want(ctx, "json")) write_json(ctx.out_dir / "gallery-check.json", doc);
    if (want(ctx, "csv")) write_text(ctx.out_dir / "continuity.csv", csv.str());
    if (want(ctx, "dat")) emit_plot_data(rows, ctx.out_dir / "continuity.dat");
    return passed ? kExitOk : kExitVerdictFailed;
  }

  const ExperimentConfig& c = ctx.config;
  const GalleryProblem problem = make_gallery_problem(name, c.grid.d, c.grid.L, c.grid.N, c.grid.m);
  const EigenOptions eo = c.eigen_options();
  if (check.empty()) {
    check = problem.expected.decomposition ? "merge" : !problem.expected.reference_spectrum.empty() ? "spectrum" : "sandwich";
  }
  json doc = {{"name", name}, {"check", check}, {"expected", to_json(problem.expected)}};
  bool passed = false;
  if (check == "merge") {
    if (!problem.expected.decomposition) throw ConfigError(name + " has no block decomposition to merge");
    const MergeReport mr = spectrum_merge_check(problem, c.solver.k, 1e-8, eo);
    passed = mr.passed;
    doc["report"] = to_json(mr);
    if (want(ctx, "csv")) write_merge_csv(mr, ctx.out_dir / "merge.csv");
    ctx.out << "merge max deviation " << fmt(mr.max_deviation) << '\n';
  } else if (check == "spectrum") {
    const auto& ref = problem.expected.reference_spectrum;
    if (ref.empty()) throw ConfigError(name + " has no reference spectrum");
    const SampledFields f = problem.sample();
    const SymmetricOperator op = assemble_operator(assemble_form(f.diffusion, f.potential, problem.grid()));
    EigenOptions opts = eo;
    opts.keep_vectors = false;
    const SpectrumReport sr = eigen_lowest(op, ref.size(), c.solver.tol, opts);
    double worst = 0.0;
    for (std::size_t n = 0; n < ref.size(); ++n) worst = std::max(worst, std::abs(sr.eigenvalues[n] - ref[n]) / ref[n]);
    passed = worst <= problem.expected.reference_rel_tol;
    doc["report"] = to_json(sr);
    doc["max_relative_deviation"] = worst;
    if (want(ctx, "csv")) write_spectrum_csv(sr, ctx.out_dir / "spectrum.csv");
    if (want(ctx, "dat")) emit_plot_data(sr, ctx.out_dir / "spectrum.dat");
    ctx.out << "spectrum max relative deviation " << fmt(worst) << '\n';
  } else if (check == "sandwich") {
    const SampledFields f = problem.sample();
    const SandwichReport sr = sandwich_check(f.diffusion, f.potential, problem.grid(), c.solver.k, eo);
    passed = sr.passed;
    doc["report"] = to_json(sr);
    if (want(ctx, "dat")) emit_plot_data(sr, ctx.out_dir / "sandwich.dat");
    ctx.out << "sandwich " << (passed ? "holds" : "violated") << '\n';
  } else {
    throw ConfigError("unknown gallery check '" + check + "'");
  }
  doc["passed"] = passed;
  if (want(ctx, "json")) write_json(ctx.out_dir / "gallery-check.json", doc);
  return passed ? kExitOk : kExitVerdictFailed;
}

int dispatch(Invocation& inv, std::ostream& out) {
  if (!inv.help.empty()) {
    out << inv.help;
    return kExitOk;
  }
  if (inv.command == "gallery") {
    if (inv.gallery_list) {
      const json listing = gallery_listing();
      out << listing.dump(2) << '\n';
      if (inv.doc.contains("output")) {
        const ExperimentConfig c = parse_config(inv.doc);
        write_json(fs::path(c.output.dir) / "gallery.json", listing);
      }
      return kExitOk;
    }
    if (!inv.gallery_name) throw ConfigError("gallery needs --list or --name");
    const std::string& name = *inv.gallery_name;
    bool known = false;
    for (const auto& e : gallery_catalog()) known = known || e.name == name;
    if (!known) throw ConfigError("unknown gallery entry '" + name + "'");
    if (name != "antisymmetric_continuity") inv.doc["coefficients"] = {{"family", name}};
    if (!inv.doc.contains("grid")) {
      inv.doc["grid"] = gallery_grid_defaults(name);
    } else {
      json defaults = gallery_grid_defaults(name);
      defaults.update(inv.doc["grid"]);
      inv.doc["grid"] = defaults;
    }
  }

  Context ctx{parse_config(inv.doc), fs::path(), out};
  ctx.out_dir = ctx.config.output.dir;
  fs::create_directories(ctx.out_dir);
  write_json(ctx.out_dir / "resolved-config.json", to_json(ctx.config));

  if (inv.command == "assemble") return cmd_assemble(ctx);
  if (inv.command == "spectrum") return cmd_spectrum(ctx);
  if (inv.command == "evolve") return cmd_evolve(ctx);
  if (inv.command == "verify") return cmd_verify(ctx);
  return cmd_gallery_check(ctx, *inv.gallery_name, inv.gallery_check);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    Invocation inv = parse_command_line(args);
    return dispatch(inv, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const EllipticityError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const fs::filesystem_error& e) {
    err << "filesystem error: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace matschrod::cli
