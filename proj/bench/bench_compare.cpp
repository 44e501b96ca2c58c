// Times the serial reference comparison against the OpenMP path on a seeded
// scene and checks that both produce the same per-class results.
//
//   bench_compare [images] [max_threads]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <omp.h>

#include "ctxval/pipeline.hpp"
#include "ctxval/synthgen.hpp"

using namespace ctxval;

namespace {

template <class F>
double seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t images = argc > 1 ? std::stoul(argv[1]) : 100;
    const int max_threads = argc > 2 ? std::stoi(argv[2]) : omp_get_num_procs();

    ScenarioConfig sc;
    sc.images = images;
    const Dataset gt_a = generate_dataset(sc, 1).dataset;
    const Dataset gt_b = generate_dataset(sc, 2).dataset;
    CorruptionModel cm;
    cm.center_jitter_px = 2.0;
    cm.default_miss = 0.05;
    const Dataset a = synthesize_predictions(gt_a, cm, 11);
    const Dataset b = synthesize_predictions(gt_b, cm, 12);
    std::printf("objects: A=%zu B=%zu, patch 120x120, theta 0.8\n", a.object_count(), b.object_count());

    CompareConfig cfg;
    CompareReport ref;
    const double t_serial = seconds([&] { ref = compare_serial(a, b, cfg); });
    std::printf("%-12s %8.3f s\n", "serial", t_serial);

    for (int t = 1; t <= max_threads; t *= 2) {
        cfg.threads = t;
        CompareReport par;
        const double dt = seconds([&] { par = compare(a, b, cfg); });
        const bool same = par.classes == ref.classes;
        std::printf("omp x%-7d %8.3f s  speedup %5.2f  %s\n", t, dt, t_serial / dt, same ? "match" : "MISMATCH");
        if (!same) return EXIT_FAILURE;
    }
    return EXIT_SUCCESS;
}
