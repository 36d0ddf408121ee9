// Benchmark: serial reference kernels vs the OpenMP variants on the matmul
// shapes the training loop actually hits. Also asserts bit-identical output.

#include <chrono>
#include <cstdio>
#include <cstring>

#include "tabsynth/kernels.hpp"
#include "tabsynth/rng.hpp"

using namespace tabsynth;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, RngStream& rng) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

using KernelFn = void (*)(const Matrix&, const Matrix&, Matrix&);

double time_ms(KernelFn fn, const Matrix& a, const Matrix& b, Matrix& c, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn(a, b, c);
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void bench_case(const char* name, KernelFn serial, KernelFn parallel, std::size_t n, std::size_t k,
                std::size_t m, bool transpose_a, bool transpose_b) {
    RngStream rng(42);
    const Matrix a = transpose_a ? random_matrix(k, n, rng) : random_matrix(n, k, rng);
    const Matrix b = transpose_b ? random_matrix(m, k, rng) : random_matrix(k, m, rng);
    Matrix c1(n, m), c2(n, m);
    const int reps = static_cast<int>(std::max<std::size_t>(1, 20000000 / (n * k * m)));
    const double ts = time_ms(serial, a, b, c1, reps);
    const double tp = time_ms(parallel, a, b, c2, reps);
    const bool identical = std::memcmp(c1.data(), c2.data(), c1.size() * sizeof(double)) == 0;
    std::printf("%-10s %4zux%-4zux%-4zu serial %8.3f ms   parallel %8.3f ms   speedup %.2fx   %s\n",
                name, n, k, m, ts, tp, ts / tp, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
    std::printf("threads: %d (OpenMP %s)\n", kernels::thread_count(),
                kernels::parallel_available() ? "enabled" : "unavailable");
    // batch x input -> hidden and hidden -> hidden shapes from the nets.
    bench_case("matmul_nt", kernels::matmul_nt_serial, kernels::matmul_nt_parallel, 500, 134, 256,
               false, true);
    bench_case("matmul_nt", kernels::matmul_nt_serial, kernels::matmul_nt_parallel, 500, 256, 256,
               false, true);
    bench_case("matmul_tn", kernels::matmul_tn_serial, kernels::matmul_tn_parallel, 256, 500, 256,
               true, false);
    bench_case("matmul_nn", kernels::matmul_nn_serial, kernels::matmul_nn_parallel, 500, 256, 256,
               false, false);
    bench_case("matmul_nn", kernels::matmul_nn_serial, kernels::matmul_nn_parallel, 50, 2560, 256,
               false, false);
    return 0;
}
