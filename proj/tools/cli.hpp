#pragma once

#include <iosfwd>

#include "json.hpp"
#include "qnewton/diagnostics.hpp"

namespace qnewton::cli {

// Exit codes: 0 success, 1 configuration error, 2 runtime failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// k, x0..x{m-1}, f, grad_half_norm, delta_index, branch, minsp_A, gamma, step_norm
void write_trace_csv(std::ostream& os, const RunResult& run);

// Plain-text P2: gray 0 for no root, otherwise evenly spaced levels per root
// index; the first image row is the top (largest y) of the rectangle.
void write_basin_pgm(std::ostream& os, const BasinGrid& grid, int root_count);

// ix, iy, root_index, iters
void write_basin_csv(std::ostream& os, const BasinGrid& grid);

}  // namespace qnewton::cli
