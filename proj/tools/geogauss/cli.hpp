#pragma once

#include <iosfwd>

namespace geogauss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFailed = 2;  // statistic above threshold or no convergence

/// Entry point of the `geogauss` tool. Subcommands: laplace, reparam-laplace,
/// rosenblatt, riemann-check, fisher, figure2, validate.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace geogauss::cli
