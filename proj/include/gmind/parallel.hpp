#pragma once

#include <cstddef>
#include <functional>

namespace gmind {

// Worker cap used by every pixel-parallel loop in the library. 0 means
// hardware concurrency. Results never depend on this value: parallel loops
// only write disjoint outputs and all reductions run serially afterwards.
void set_num_threads(int n);
int num_threads();

// Calls fn(begin_row, end_row) over disjoint row blocks covering [0, rows).
void parallel_rows(int rows, const std::function<void(int, int)> &fn);

} // namespace gmind
