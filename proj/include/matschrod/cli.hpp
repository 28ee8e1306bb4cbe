#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace matschrod::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerdictFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

// matschrod <assemble|spectrum|evolve|verify|gallery> [--config PATH]
//           [--key.path=value ...] [--seed N] [--out DIR]
//
// `args` excludes the program name. Every run writes resolved-config.json
// into the output directory before doing any work.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace matschrod::cli
