#pragma once

namespace rmglab {

/// Execution policy for the hot kernels. `serial` selects a separate plain-loop
/// reference implementation; tests assert both produce bitwise-identical output.
enum class exec { parallel, serial };

/// Threads the parallel kernels may use: min(hardware, RMGLAB_THREADS if set,
/// explicit cap if set). Always >= 1.
int thread_count();

/// Overrides the thread cap in-process (tests, benchmark). 0 clears the override
/// so the environment variable and hardware limits apply again.
void set_thread_cap(int cap);

} // namespace rmglab
