#pragma once

#include <functional>

namespace nls {

// Worker count used by sweeps. Defaults to the NLS_THREADS environment
// variable, else 1.
int thread_count();
void set_thread_count(int n);

// Calls fn(i) for i in [0, n). Each index writes only its own slot, so results
// do not depend on the schedule. The first exception is rethrown.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace nls
