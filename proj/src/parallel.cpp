#include "fpi/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace fpi {

int worker_count() { return omp_get_max_threads(); }

void set_worker_count(int workers) { omp_set_num_threads(workers < 1 ? 1 : workers); }

int configure_workers_from_env() {
    if (const char* raw = std::getenv("FPI_WORKERS")) {
        try {
            const int n = std::stoi(raw);
            if (n >= 1) set_worker_count(n);
        } catch (const std::exception&) {
        }
    }
    return worker_count();
}

}  // namespace fpi
