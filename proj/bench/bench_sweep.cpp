// Compares the serial reference kernel against the OpenMP corpus sweep.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sweep.hpp"

using namespace molred;

namespace {

double timed(SweepStats (*fn)(const SweepConfig&), const SweepConfig& cfg, SweepStats& out) {
    auto start = std::chrono::steady_clock::now();
    out = fn(cfg);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
    SweepConfig cfg;
    cfg.max_total_internal = argc > 1 ? std::atoi(argv[1]) : 5;
    cfg.random_count = 0;
    cfg.brute_force_stride = 0;
    cfg.brute_force_full_max = 4;

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("corpus: couples with <= %d internal nodes, %d thread(s)\n",
                cfg.max_total_internal, threads);

    SweepStats serial, parallel;
    double t_serial = timed(sweep_enumeration_serial, cfg, serial);
    cfg.parallel = true;
    double t_parallel = timed(sweep_enumeration, cfg, parallel);

    std::printf("serial:   %8.3fs  %llu couples, %llu runs, %llu failures\n", t_serial,
                (unsigned long long)serial.couples, (unsigned long long)serial.runs,
                (unsigned long long)serial.failures);
    std::printf("parallel: %8.3fs  %llu couples, %llu runs, %llu failures\n", t_parallel,
                (unsigned long long)parallel.couples, (unsigned long long)parallel.runs,
                (unsigned long long)parallel.failures);
    std::printf("speedup:  %.2fx\n", t_parallel > 0 ? t_serial / t_parallel : 0.0);

    bool same = serial.couples == parallel.couples && serial.runs == parallel.runs &&
                serial.steps == parallel.steps && serial.failures == parallel.failures;
    std::printf("kernels agree: %s\n", same ? "yes" : "NO");
    return same && serial.failures == 0 ? 0 : 1;
}
