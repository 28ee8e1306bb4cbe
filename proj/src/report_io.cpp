#include "matschrod/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace matschrod {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

json json_number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

namespace {

json numbers(const std::vector<double>& xs) {
  json out = json::array();
  for (double x : xs) out.push_back(json_number(x));
  return out;
}

}  // namespace

json to_json(const Verdict& v) {
  return {{"name", v.name}, {"passed", v.passed}, {"guaranteed", v.guaranteed}, {"detail", v.detail}};
}

json to_json(const ProbeReport& r) {
  json doc;
  doc["kind"] = r.kind;
  doc["label"] = r.label;
  doc["passed"] = r.passed;
  json verdicts = json::array();
  for (const Verdict& v : r.verdicts) verdicts.push_back(to_json(v));
  doc["verdicts"] = verdicts;
  doc["notes"] = r.notes;
  doc["min_component"] = json_number(r.min_component);
  double worst = -kInfinity;
  for (const ProbeRow& row : r.rows) worst = std::max(worst, row.ratio);
  doc["max_ratio"] = json_number(worst);
  doc["rows"] = r.rows.size();
  if (r.witness) {
    const Witness& w = *r.witness;
    doc["witness"] = {{"found", w.found},         {"t", w.t},
                      {"node", w.node},           {"component", w.component},
                      {"value", w.value},         {"threshold", w.threshold},
                      {"source_component", w.source_component}};
  }
  return doc;
}

json to_json(const SpectrumReport& r) {
  return {{"eigenvalues", numbers(r.eigenvalues)}, {"residuals", numbers(r.residuals)},
          {"method", r.method},                    {"iterations", r.iterations},
          {"tolerance", r.tolerance},              {"norm_bound", json_number(r.norm_bound)},
          {"converged", r.converged}};
}

json to_json(const SandwichReport& r) {
  return {{"lambda", numbers(r.lambda)},
          {"lower", numbers(r.lower)},
          {"upper", numbers(r.upper)},
          {"max_lower_violation", json_number(r.max_lower_violation)},
          {"max_upper_violation", json_number(r.max_upper_violation)},
          {"passed", r.passed}};
}

json to_json(const MergeReport& r) {
  return {{"vector_eigs", numbers(r.vector_eigs)},
          {"merged_eigs", numbers(r.merged_eigs)},
          {"max_deviation", json_number(r.max_deviation)},
          {"basis_defect", json_number(r.basis_defect)},
          {"passed", r.passed}};
}

json to_json(const ExpectedProperties& e) {
  json doc;
  doc["psd"] = e.psd;
  doc["symmetric"] = e.symmetric;
  doc["positive"] = e.positive ? json(*e.positive) : json(nullptr);
  doc["sandwich_applicable"] = e.sandwich_applicable;
  if (e.decomposition) {
    json blocks = json::array();
    for (const auto& b : e.decomposition->blocks) {
      blocks.push_back({{"coefficient", b.coefficient}, {"multiplicity", b.multiplicity}});
    }
    doc["decomposition"] = blocks;
  } else {
    doc["decomposition"] = nullptr;
  }
  doc["reference_spectrum"] = numbers(e.reference_spectrum);
  doc["reference_rel_tol"] = e.reference_rel_tol;
  doc["mu_offset"] = e.mu_offset ? json_number(*e.mu_offset) : json(nullptr);
  return doc;
}

json gallery_listing() {
  json out = json::array();
  for (const GalleryEntry& e : gallery_catalog()) {
    json item = {{"name", e.name}, {"description", e.description}};
    if (e.name == "harmonic_oscillator") {
      item["expected"] = to_json(harmonic_oscillator(10.0, 200).expected);
    } else if (e.name == "degenerate_counterexample") {
      item["expected"] = to_json(degenerate_counterexample(10.0, 200, 2).expected);
    } else if (e.name == "coupled_confining") {
      item["expected"] = to_json(coupled_confining(10.0, 200, 2).expected);
    } else {
      ExpectedProperties anti;
      anti.psd = false;
      anti.symmetric = false;
      item["expected"] = to_json(anti);
    }
    out.push_back(item);
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error("write to " + path.string() + " failed");
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

void write_spectrum_csv(const SpectrumReport& r, const fs::path& path) {
  std::ostringstream s;
  s << "index,eigenvalue,residual\n";
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
    const double res = i < r.residuals.size() ? r.residuals[i] : std::nan("");
    s << i + 1 << ',' << format_double(r.eigenvalues[i]) << ',' << format_double(res) << '\n';
  }
  write_text(path, s.str());
}

void write_probe_csv(const std::vector<ProbeReport>& reports, const fs::path& path) {
  std::ostringstream s;
  s << "kind,f_index,t,p,input_norm,output_norm,ratio,bound,passed\n";
  for (const ProbeReport& r : reports) {
    for (const ProbeRow& row : r.rows) {
      s << r.kind << ',' << row.f_index << ',' << format_double(row.t) << ',' << format_double(row.p) << ','
        << format_double(row.input_norm) << ',' << format_double(row.output_norm) << ','
        << format_double(row.ratio) << ',' << format_double(row.bound) << ',' << (row.passed ? 1 : 0) << '\n';
    }
  }
  write_text(path, s.str());
}

void write_merge_csv(const MergeReport& r, const fs::path& path) {
  std::ostringstream s;
  s << "index,vector,merged,deviation\n";
  for (std::size_t i = 0; i < r.vector_eigs.size(); ++i) {
    s << i + 1 << ',' << format_double(r.vector_eigs[i]) << ',' << format_double(r.merged_eigs[i]) << ','
      << format_double(r.deviation[i]) << '\n';
  }
  write_text(path, s.str());
}

void emit_plot_data(const SpectrumReport& r, const fs::path& path) {
  std::ostringstream s;
  s << "# n eigenvalue\n";
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) s << i + 1 << ' ' << format_double(r.eigenvalues[i]) << '\n';
  write_text(path, s.str());
}

void emit_plot_data(const SandwichReport& r, const fs::path& path) {
  std::ostringstream s;
  s << "# n lower lambda upper\n";
  for (std::size_t i = 0; i < r.lambda.size(); ++i) {
    s << i + 1 << ' ' << format_double(r.lower[i]) << ' ' << format_double(r.lambda[i]) << ' '
      << format_double(r.upper[i]) << '\n';
  }
  write_text(path, s.str());
}

void emit_plot_data(const ProbeReport& r, const fs::path& path) {
  std::vector<double> ps;
  std::map<double, std::map<double, double>> worst;  // t -> p -> max ratio
  for (const ProbeRow& row : r.rows) {
    if (std::find(ps.begin(), ps.end(), row.p) == ps.end()) ps.push_back(row.p);
    auto& slot = worst[row.t].try_emplace(row.p, -kInfinity).first->second;
    slot = std::max(slot, row.ratio);
  }
  std::ostringstream s;
  s << "# t";
  for (double p : ps) s << " p=" << format_double(p);
  s << '\n';
  for (const auto& [t, by_p] : worst) {
    s << format_double(t);
    for (double p : ps) {
      const auto it = by_p.find(p);
      s << ' ' << (it == by_p.end() ? std::string("nan") : format_double(it->second));
    }
    s << '\n';
  }
  write_text(path, s.str());
}

void emit_plot_data(const std::vector<ContinuityDemoRow>& rows, const fs::path& path) {
  std::ostringstream s;
  s << "# n r_n\n";
  for (const ContinuityDemoRow& row : rows) s << row.n << ' ' << format_double(row.ratio) << '\n';
  write_text(path, s.str());
}

}  // namespace matschrod
