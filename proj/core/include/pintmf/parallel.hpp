#pragma once

namespace pintmf {

/// Sets the worker count used by row/column-parallel loops. Values < 1 restore the default.
void set_num_threads(int n);

/// Applies PINTMF_NUM_THREADS from the environment, if set.
void configure_threads_from_env();

int num_threads();

}  // namespace pintmf
