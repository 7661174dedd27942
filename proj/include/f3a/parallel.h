#pragma once

#include <functional>

namespace f3a {

// Worker count for internal parallel loops. Initialized from the F3A_THREADS
// environment variable on first use (hardware concurrency when unset).
int worker_count();
void set_worker_count(int n);

// Runs fn(i) for i in [0, n). Each i must write only to its own slots, which
// makes results independent of the schedule.
void parallel_for(int n, const std::function<void(int)>& fn, int min_chunk = 64);

}  // namespace f3a
