#pragma once

#include <cstddef>

namespace fpi {

/// Number of worker threads used inside solver sweeps. Sweeps are
/// synchronous and every reduction is an exact min/max, so results do not
/// depend on this value.
int worker_count();
void set_worker_count(int workers);

/// Reads FPI_WORKERS; leaves the current setting alone when unset or
/// malformed. Returns the effective worker count.
int configure_workers_from_env();

}  // namespace fpi
