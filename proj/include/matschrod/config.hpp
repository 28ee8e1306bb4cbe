#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "matschrod/gallery.hpp"
#include "matschrod/semigroup.hpp"

namespace matschrod {

// Experiment description; the JSON schema is documented in README.md.
struct ExperimentConfig {
  std::uint64_t seed = 42;

  struct Grid {
    int d = 1;
    double L = 10.0;
    int N = 200;
    int m = 1;
  } grid;

  struct Coefficients {
    // constant | harmonic_oscillator | degenerate_counterexample | coupled_confining
    std::string family = "constant";
    std::optional<Matrix> Q;  // constant family; identity when absent
    std::optional<Matrix> V;  // constant family; zero when absent
    double confinement = 0.0;  // constant family; adds c |x|^2 I_m to V
  } coefficients;

  struct Solver {
    std::size_t k = 10;
    double tol = 1e-10;
    std::string method = "auto";  // auto | dense | lanczos
    std::size_t dense_limit = 3000;
    int block_size = 0;
  } solver;

  PropagatorConfig propagator;

  struct Probes {
    bool form = true;
    bool beurling_denny = true;
    bool contraction = true;
    bool strong_continuity = true;
    bool positivity = true;
    bool sandwich = true;
    bool merge = true;
    bool reference_spectrum = true;
    int trials = 20;
  } probes;

  struct Initial {
    std::string kind = "bump";  // bump | random | impulse
    std::vector<double> center;  // defaults to the origin
    double scale = 1.0;
    int component = 0;
  } initial;

  struct Output {
    std::string dir = "out";
    std::vector<std::string> formats{"json", "csv", "dat"};
  } output;

  bool wants(const std::string& format) const;
  EigenOptions eigen_options() const;
};

// Throws ConfigError on unknown keys, wrong types or inconsistent values
// (including solver.k larger than m N^d).
ExperimentConfig parse_config(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& config);

// Sets the value at a dotted path ("grid.N") from its command-line text;
// the text is read as JSON when it parses, as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& dotted_path, const std::string& value);

GalleryProblem build_problem(const ExperimentConfig& config);

}  // namespace matschrod
