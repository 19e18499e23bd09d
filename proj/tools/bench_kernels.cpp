// Benchmark comparing the serial reference kernels against the OpenMP
// entry points on a realistic operator: the monolithic matrix of the 2-D
// dual-porosity problem (two coupled 5-point stencils). Both variants are
// timed over repeated applications and their outputs cross-checked; the
// kernels promise bitwise-identical results regardless of thread count, so
// any mismatch is reported as an error.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "blocksplit/block_system.hpp"
#include "blocksplit/csr.hpp"
#include "blocksplit/kernels.hpp"
#include "blocksplit/mms.hpp"

using namespace blocksplit;

namespace {

double time_loop(int reps, const std::function<void()>& body) {
    body();  // warm-up, touches every page once
    auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) body();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
           reps;
}

bool identical(const DenseVector& x, const DenseVector& y) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] != y[i]) return false;
    return true;
}

void report(const char* name, double serial, double parallel, double gbytes, bool match) {
    std::printf("%-6s  serial %8.3f ms  parallel %8.3f ms  speedup %5.2fx  %6.2f GB/s  %s\n",
                name, serial * 1e3, parallel * 1e3, serial / parallel, gbytes / parallel,
                match ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    int cells = 256;
    int reps = 50;
    CLI::App app{"Serial-vs-OpenMP kernel benchmark on the 2-D dual-porosity operator"};
    app.add_option("--cells", cells, "grid cells per side")->check(CLI::PositiveNumber);
    app.add_option("--reps", reps, "timed repetitions per kernel")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP, both variants run serially\n");
#endif

    CsrMatrix m = monolithic_assemble(assemble_dual_porosity_2d({cells, cells}, 10.0).system);
    int n = m.n_rows;
    std::printf("operator: %d x %d, %zu nonzeros (%d x %d grid, two fields)\n\n", n, n,
                m.values.size(), cells, cells);

    std::mt19937_64 rng(20240801);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    DenseVector x(n);
    for (double& e : x) e = dist(rng);
    DenseVector y(n);
    for (double& e : y) e = dist(rng);

    // spmv: streams the matrix once per application.
    DenseVector out_serial(n), out_parallel(n);
    double spmv_bytes = 1e-9 * (m.values.size() * (sizeof(double) + sizeof(int)) +
                                (n + 1.0) * sizeof(int) + 2.0 * n * sizeof(double));
    double t_serial = time_loop(reps, [&] { kernels::spmv_serial(m, x.data(), out_serial.data()); });
    double t_parallel = time_loop(reps, [&] { kernels::spmv(m, x.data(), out_parallel.data()); });
    bool ok = identical(out_serial, out_parallel);
    report("spmv", t_serial, t_parallel, spmv_bytes, ok);

    // dot: two read streams.
    double dot_bytes = 1e-9 * 2.0 * n * sizeof(double);
    volatile double sink = 0.0;
    double d_serial = 0.0, d_parallel = 0.0;
    t_serial = time_loop(reps, [&] { d_serial = kernels::dot_serial(x.data(), y.data(), n); });
    sink = sink + d_serial;
    t_parallel = time_loop(reps, [&] { d_parallel = kernels::dot(x.data(), y.data(), n); });
    sink = sink + d_parallel;
    ok = ok && d_serial == d_parallel;
    report("dot", t_serial, t_parallel, dot_bytes, d_serial == d_parallel);

    // axpy: two reads, one write. Restore y after each variant so both see
    // the same input.
    DenseVector y0 = y;
    double axpy_bytes = 1e-9 * 3.0 * n * sizeof(double);
    t_serial = time_loop(reps, [&] { kernels::axpy_serial(0.5, x.data(), y.data(), n); });
    DenseVector y_serial = y;
    y = y0;
    t_parallel = time_loop(reps, [&] { kernels::axpy(0.5, x.data(), y.data(), n); });
    bool axpy_ok = identical(y_serial, y);
    ok = ok && axpy_ok;
    report("axpy", t_serial, t_parallel, axpy_bytes, axpy_ok);

    (void)sink;
    return ok ? 0 : 1;
}
