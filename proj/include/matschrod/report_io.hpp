#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "matschrod/gallery.hpp"
#include "matschrod/semigroup.hpp"

namespace matschrod {

namespace fs = std::filesystem;

// Shortest text that reads back to the same double; inf/nan spelled out.
std::string format_double(double x);

// JSON number, or null for non-finite values.
nlohmann::json json_number(double x);

nlohmann::json to_json(const Verdict& v);
nlohmann::json to_json(const ProbeReport& report);
nlohmann::json to_json(const SpectrumReport& report);
nlohmann::json to_json(const SandwichReport& report);
nlohmann::json to_json(const MergeReport& report);
nlohmann::json to_json(const ExpectedProperties& expected);
nlohmann::json gallery_listing();

// Files are written atomically enough for our purposes: truncate, write,
// flush, throw Error on any stream failure.
void write_text(const fs::path& path, const std::string& text);
void write_json(const fs::path& path, const nlohmann::json& doc);

// index,eigenvalue,residual
void write_spectrum_csv(const SpectrumReport& report, const fs::path& path);
// kind,f_index,t,p,input_norm,output_norm,ratio,bound,passed
void write_probe_csv(const std::vector<ProbeReport>& reports, const fs::path& path);
// index,vector,merged,deviation
void write_merge_csv(const MergeReport& report, const fs::path& path);

// Plain "x y..." columns with a '#' header line, for gnuplot and friends.
// An empty report produces the header only.
void emit_plot_data(const SpectrumReport& report, const fs::path& path);
// n lower lambda upper
void emit_plot_data(const SandwichReport& report, const fs::path& path);
// t followed by the largest ratio over f for each p of the probe
void emit_plot_data(const ProbeReport& contraction, const fs::path& path);
// n r_n
void emit_plot_data(const std::vector<ContinuityDemoRow>& rows, const fs::path& path);

}  // namespace matschrod
