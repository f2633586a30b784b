#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace graphmark::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `graphmark` invocation. `argv[0]` is the program name.
int dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace graphmark::cli
