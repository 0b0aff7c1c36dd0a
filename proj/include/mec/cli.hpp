#pragma once

#include <iosfwd>

namespace mec {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 1;
inline constexpr int kExitConfigError = 2;

/// Entry point of the mec_sched tool. Subcommands: value, simulate, sweep,
/// validate. Results go to --out or to `out`; diagnostics go to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mec
