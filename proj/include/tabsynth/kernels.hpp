#pragma once

#include "tabsynth/matrix.hpp"

namespace tabsynth::kernels {

// The OpenMP kernels parallelize over output rows only: every output element
// is accumulated by exactly one thread in the same k-order as the serial
// reference, so both backends produce bit-identical results. Tests and the
// benchmark tool rely on that equivalence.
enum class Backend { serial, parallel };

Backend backend();
void set_backend(Backend b);
bool parallel_available();
int thread_count();

// C = A * B            A: n x k, B: k x m, C: n x m
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c);
// C = A * B^T          A: n x k, B: m x k, C: n x m
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c);
// C = A^T * B          A: k x n, B: k x m, C: n x m
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c);

// Serial reference implementations, kept callable for tests/benchmarks.
void matmul_nn_serial(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_nt_serial(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_tn_serial(const Matrix& a, const Matrix& b, Matrix& c);

void matmul_nn_parallel(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_nt_parallel(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_tn_parallel(const Matrix& a, const Matrix& b, Matrix& c);

}  // namespace tabsynth::kernels
