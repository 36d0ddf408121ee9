#include "tabsynth/kernels.hpp"

#include <atomic>
#include <cstdint>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tabsynth::kernels {

namespace {

std::atomic<Backend> g_backend{
#ifdef _OPENMP
    Backend::parallel
#else
    Backend::serial
#endif
};

void check_nn(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols())
        throw std::invalid_argument("matmul_nn: shape mismatch");
}

void check_nt(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.cols() != b.cols() || c.rows() != a.rows() || c.cols() != b.rows())
        throw std::invalid_argument("matmul_nt: shape mismatch");
}

void check_tn(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols())
        throw std::invalid_argument("matmul_tn: shape mismatch");
}

// Row i of C accumulated in k-order; shared by both backends.
inline void nn_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
    const std::size_t kk = a.cols(), m = b.cols();
    double* ci = c.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) ci[j] = 0.0;
    const double* ai = a.data() + i * kk;
    for (std::size_t k = 0; k < kk; ++k) {
        const double aik = ai[k];
        const double* bk = b.data() + k * m;
        for (std::size_t j = 0; j < m; ++j) ci[j] += aik * bk[j];
    }
}

// Row of C = A * B^T against a pre-transposed copy of B (k x m, row-major),
// saxpy-style so the compiler can vectorize without reassociating reductions.
inline void nt_row(const Matrix& a, const std::vector<double>& bt, std::size_t m, Matrix& c,
                   std::size_t i) {
    const std::size_t kk = a.cols();
    double* ci = c.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) ci[j] = 0.0;
    const double* ai = a.data() + i * kk;
    for (std::size_t k = 0; k < kk; ++k) {
        const double aik = ai[k];
        const double* bk = bt.data() + k * m;
        for (std::size_t j = 0; j < m; ++j) ci[j] += aik * bk[j];
    }
}

std::vector<double> transpose_to(const Matrix& b) {
    std::vector<double> bt(b.size());
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) bt[j * b.rows() + i] = b(i, j);
    return bt;
}

inline void tn_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
    // C(i, :) = sum_k A(k, i) * B(k, :)
    const std::size_t kk = a.rows(), m = b.cols(), n = a.cols();
    double* ci = c.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) ci[j] = 0.0;
    for (std::size_t k = 0; k < kk; ++k) {
        const double aki = a.data()[k * n + i];
        const double* bk = b.data() + k * m;
        for (std::size_t j = 0; j < m; ++j) ci[j] += aki * bk[j];
    }
}

}  // namespace

Backend backend() { return g_backend.load(std::memory_order_relaxed); }

void set_backend(Backend b) {
    if (b == Backend::parallel && !parallel_available())
        throw std::invalid_argument("kernels: parallel backend requested but OpenMP is not compiled in");
    g_backend.store(b, std::memory_order_relaxed);
}

bool parallel_available() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void matmul_nn_serial(const Matrix& a, const Matrix& b, Matrix& c) {
    check_nn(a, b, c);
    for (std::size_t i = 0; i < a.rows(); ++i) nn_row(a, b, c, i);
}

void matmul_nt_serial(const Matrix& a, const Matrix& b, Matrix& c) {
    check_nt(a, b, c);
    const auto bt = transpose_to(b);
    for (std::size_t i = 0; i < a.rows(); ++i) nt_row(a, bt, b.rows(), c, i);
}

void matmul_tn_serial(const Matrix& a, const Matrix& b, Matrix& c) {
    check_tn(a, b, c);
    for (std::size_t i = 0; i < a.cols(); ++i) tn_row(a, b, c, i);
}

void matmul_nn_parallel(const Matrix& a, const Matrix& b, Matrix& c) {
    check_nn(a, b, c);
    const std::int64_t n = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) nn_row(a, b, c, static_cast<std::size_t>(i));
}

void matmul_nt_parallel(const Matrix& a, const Matrix& b, Matrix& c) {
    check_nt(a, b, c);
    const auto bt = transpose_to(b);
    const std::int64_t n = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) nt_row(a, bt, b.rows(), c, static_cast<std::size_t>(i));
}

void matmul_tn_parallel(const Matrix& a, const Matrix& b, Matrix& c) {
    check_tn(a, b, c);
    const std::int64_t n = static_cast<std::int64_t>(a.cols());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) tn_row(a, b, c, static_cast<std::size_t>(i));
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c) {
    backend() == Backend::parallel ? matmul_nn_parallel(a, b, c) : matmul_nn_serial(a, b, c);
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c) {
    backend() == Backend::parallel ? matmul_nt_parallel(a, b, c) : matmul_nt_serial(a, b, c);
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c) {
    backend() == Backend::parallel ? matmul_tn_parallel(a, b, c) : matmul_tn_serial(a, b, c);
}

}  // namespace tabsynth::kernels
