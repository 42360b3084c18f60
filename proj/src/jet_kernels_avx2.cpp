// AVX2 variants of the coefficient kernels. This translation unit is compiled
// with -mavx2 (see src/CMakeLists.txt); nothing here runs unless the runtime
// dispatcher confirmed cpuid support, so the intrinsics are safe to emit.

#include "riggeo/jet_kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace riggeo::kernels {

#if defined(__AVX2__)

namespace {

// Four output coefficients per block; operand coefficients fetched with
// 32-bit-index gathers. Padding lanes gather the zero slot past the live
// coefficients, contributing exact zeros — the same additions the scalar
// reference performs.
void mul_avx2(const MulPlan& plan, const double* a, const double* b, double* out) {
    for (int blk = 0; blk < plan.n_blocks; ++blk) {
        const int base = 4 * blk;
        const int iters = plan.block_iters[blk];
        const std::int32_t* ia = plan.ia.data() + 4 * static_cast<std::size_t>(plan.block_start[blk]);
        const std::int32_t* ib = plan.ib.data() + 4 * static_cast<std::size_t>(plan.block_start[blk]);
        __m256d acc = _mm256_setzero_pd();
        for (int t = 0; t < iters; ++t) {
            const __m128i va_idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ia + 4 * t));
            const __m128i vb_idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ib + 4 * t));
            const __m256d va = _mm256_i32gather_pd(a, va_idx, 8);
            const __m256d vb = _mm256_i32gather_pd(b, vb_idx, 8);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
        }
        _mm256_storeu_pd(out + base, acc);
    }
    for (int s = 4 * plan.n_blocks; s < kCoeffStride; ++s) out[s] = 0.0;
}

void add_avx2(const double* a, const double* b, double* out) {
    for (int i = 0; i < kCoeffStride; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
}

void sub_avx2(const double* a, const double* b, double* out) {
    for (int i = 0; i < kCoeffStride; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
}

void scale_avx2(double s, const double* a, double* out) {
    const __m256d vs = _mm256_set1_pd(s);
    for (int i = 0; i < kCoeffStride; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(vs, _mm256_loadu_pd(a + i)));
}

void axpy_avx2(double s, const double* a, double* out) {
    const __m256d vs = _mm256_set1_pd(s);
    for (int i = 0; i < kCoeffStride; i += 4) {
        const __m256d prod = _mm256_mul_pd(vs, _mm256_loadu_pd(a + i));
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(out + i), prod));
    }
}

} // namespace

const KernelSet* avx2_kernels_impl() {
    static const KernelSet set{"avx2", &mul_avx2, &add_avx2, &sub_avx2,
                               &scale_avx2, &axpy_avx2};
    return &set;
}

#else

const KernelSet* avx2_kernels_impl() { return nullptr; }

#endif

} // namespace riggeo::kernels
