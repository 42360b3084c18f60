#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace riggeo {

/// Hard limits of the jet arithmetic: total degree 3 in at most 6 variables.
inline constexpr int kJetOrder = 3;
inline constexpr int kMaxVars = 6;
/// C(6+3,3) = 84 monomials for the largest space.
inline constexpr int kMaxCoeffs = 84;
/// Physical coefficient array length. The slots past size() stay exactly zero
/// for the lifetime of a jet; the multiplication plans point padding lanes at
/// them so SIMD blocks can always run full width.
inline constexpr int kCoeffStride = 88;

/// Precomputed schedule for the truncated-product convolution
///   out[gamma] = sum_{alpha+beta=gamma} a[alpha]*b[beta].
/// Outputs are grouped in blocks of 4 consecutive coefficients. Within a
/// block every lane runs the same number of iterations; shorter lanes are
/// padded with index pairs that point at a guaranteed-zero slot. Both the
/// scalar and the SIMD kernels walk this table in the identical order, which
/// is what makes them bit-identical.
struct MulPlan {
    int n_out = 0;    ///< number of real output coefficients
    int n_blocks = 0; ///< ceil(n_out / 4)
    std::vector<int> block_iters;  ///< iterations per block
    std::vector<int> block_start;  ///< starting iteration offset per block
    /// Lane-major index tables: entry for (iteration t, lane l) of block b
    /// lives at [(block_start[b] + t)*4 + l].
    std::vector<std::int32_t> ia, ib;
};

/// Immutable lookup tables for one variable count: monomial enumeration
/// (degree-blocked, lexicographic within each degree), exponent vectors,
/// index maps for first/second/third partials, and the multiplication plan.
class JetSpace {
public:
    /// Shared instance for n variables, 1 <= n <= kMaxVars. Built once.
    static const JetSpace& get(int n);

    int vars() const { return n_; }
    int size() const { return size_; }

    /// Monomial slot of x_i (degree-1 block).
    int idx1(int i) const { return 1 + i; }
    /// Monomial slot of x_i*x_j (indices in any order).
    int idx2(int i, int j) const { return idx2_[i][j]; }
    /// Monomial slot of x_i*x_j*x_k (indices in any order).
    int idx3(int i, int j, int k) const { return idx3_[(i * n_ + j) * n_ + k]; }

    /// Exponent vector of a slot (only the first vars() entries are used).
    const std::array<std::uint8_t, kMaxVars>& exponents(int slot) const {
        return exps_[slot];
    }
    int degree(int slot) const { return deg_[slot]; }

    /// alpha! for a slot: converts monomial coefficients to derivatives.
    double factorial(int slot) const { return fact_[slot]; }

    /// Slot of the monomial with exponents `e`, or -1 when degree > 3.
    int slot_of(const std::array<std::uint8_t, kMaxVars>& e) const;

    const MulPlan& mul_plan() const { return plan_; }

    /// Table for d/dx_i: for each output slot s of the derivative jet,
    /// dsrc[i][s] is the source slot and dfac[i][s] the integer factor
    /// (the exponent of x_i in the source monomial). Source slots with zero
    /// exponent never appear; outputs cover all slots of degree <= 2.
    struct DerivTable {
        std::vector<std::int32_t> src;
        std::vector<double> fac;
    };
    const DerivTable& deriv_table(int i) const { return deriv_[i]; }

private:
    explicit JetSpace(int n);

    int n_ = 0;
    int size_ = 0;
    std::vector<std::array<std::uint8_t, kMaxVars>> exps_;
    std::vector<int> deg_;
    std::vector<double> fact_;
    std::array<std::array<int, kMaxVars>, kMaxVars> idx2_{};
    std::vector<int> idx3_;
    MulPlan plan_;
    std::array<DerivTable, kMaxVars> deriv_;
};

} // namespace riggeo
