#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ktba::harness {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int invalid = 2;
inline constexpr int breakdown = 3;
inline constexpr int max_iters = 4;
inline constexpr int non_finite = 5;
}  // namespace exit_code

/// `solve <problem-file> [--mode haugazeau|fejer] [--eps E] [--gamma G]
///  [--mu M] [--lambda L] [--max-iter N] [--tau-tol T] [--dist-tol D]
///  [--trace PATH] [--summary PATH]`
///
/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace ktba::harness
