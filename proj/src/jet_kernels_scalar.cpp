#include "riggeo/jet_kernels.hpp"

namespace riggeo::kernels {

namespace {

// Reference truncated-product kernel. Walks the padded pair tables in the
// exact (iteration, lane) order the SIMD variant uses: per output lane the
// accumulator starts at 0 and receives the products in iteration order, so
// the two implementations are bit-identical (FP contraction is disabled
// project-wide).
void mul_scalar(const MulPlan& plan, const double* a, const double* b, double* out) {
    for (int blk = 0; blk < plan.n_blocks; ++blk) {
        const int base = 4 * blk;
        const int iters = plan.block_iters[blk];
        const std::int32_t* ia = plan.ia.data() + 4 * static_cast<std::size_t>(plan.block_start[blk]);
        const std::int32_t* ib = plan.ib.data() + 4 * static_cast<std::size_t>(plan.block_start[blk]);
        for (int lane = 0; lane < 4; ++lane) {
            double acc = 0.0;
            for (int t = 0; t < iters; ++t)
                acc += a[ia[4 * t + lane]] * b[ib[4 * t + lane]];
            if (base + lane < kCoeffStride) out[base + lane] = acc;
        }
    }
    // Anything past the last block is untouched; plans always cover n_out
    // coefficients and the padding lanes reproduce the zero tail.
    for (int s = 4 * plan.n_blocks; s < kCoeffStride; ++s) out[s] = 0.0;
}

void add_scalar(const double* a, const double* b, double* out) {
    for (int i = 0; i < kCoeffStride; ++i) out[i] = a[i] + b[i];
}

void sub_scalar(const double* a, const double* b, double* out) {
    for (int i = 0; i < kCoeffStride; ++i) out[i] = a[i] - b[i];
}

void scale_scalar(double s, const double* a, double* out) {
    for (int i = 0; i < kCoeffStride; ++i) out[i] = s * a[i];
}

void axpy_scalar(double s, const double* a, double* out) {
    for (int i = 0; i < kCoeffStride; ++i) out[i] = out[i] + s * a[i];
}

} // namespace

const KernelSet& scalar_kernels() {
    static const KernelSet set{"scalar", &mul_scalar, &add_scalar, &sub_scalar,
                               &scale_scalar, &axpy_scalar};
    return set;
}

} // namespace riggeo::kernels
