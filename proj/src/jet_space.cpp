#include "riggeo/jet_space.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace riggeo {

namespace {

std::array<std::uint8_t, kMaxVars> zero_exp() {
    return std::array<std::uint8_t, kMaxVars>{};
}

} // namespace

JetSpace::JetSpace(int n) : n_(n) {
    // Degree-blocked enumeration: constant, then x_i, then x_i x_j (i<=j),
    // then x_i x_j x_k (i<=j<=k), lexicographic inside each block.
    exps_.push_back(zero_exp());
    for (int i = 0; i < n; ++i) {
        auto e = zero_exp();
        e[i] = 1;
        exps_.push_back(e);
    }
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            auto e = zero_exp();
            e[i] += 1;
            e[j] += 1;
            idx2_[i][j] = idx2_[j][i] = static_cast<int>(exps_.size());
            exps_.push_back(e);
        }
    idx3_.assign(static_cast<std::size_t>(n) * n * n, -1);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (int k = j; k < n; ++k) {
                auto e = zero_exp();
                e[i] += 1;
                e[j] += 1;
                e[k] += 1;
                int slot = static_cast<int>(exps_.size());
                exps_.push_back(e);
                int idx[3] = {i, j, k};
                // all permutations map to the same slot
                do {
                    idx3_[(idx[0] * n + idx[1]) * n + idx[2]] = slot;
                } while (std::next_permutation(idx, idx + 3));
            }
    size_ = static_cast<int>(exps_.size());

    deg_.resize(size_);
    fact_.resize(size_);
    for (int s = 0; s < size_; ++s) {
        int d = 0;
        double f = 1.0;
        for (int v = 0; v < n; ++v) {
            d += exps_[s][v];
            for (int m = 2; m <= exps_[s][v]; ++m) f *= m;
        }
        deg_[s] = d;
        fact_[s] = f;
    }

    // Multiplication plan. For each output monomial gamma, the contributing
    // pairs are (alpha, gamma-alpha) for every alpha <= gamma componentwise,
    // enumerated in increasing slot order of alpha — a fixed order shared by
    // all kernels.
    std::vector<std::vector<std::pair<int, int>>> pairs(size_);
    for (int out = 0; out < size_; ++out) {
        const auto& g = exps_[out];
        for (int a = 0; a < size_; ++a) {
            bool le = true;
            auto rem = zero_exp();
            for (int v = 0; v < n; ++v) {
                if (exps_[a][v] > g[v]) {
                    le = false;
                    break;
                }
                rem[v] = static_cast<std::uint8_t>(g[v] - exps_[a][v]);
            }
            if (!le) continue;
            int b = slot_of(rem);
            pairs[out].emplace_back(a, b);
        }
    }

    plan_.n_out = size_;
    plan_.n_blocks = (size_ + 3) / 4;
    const std::int32_t pad = static_cast<std::int32_t>(size_); // guaranteed-zero slot
    int start = 0;
    for (int b = 0; b < plan_.n_blocks; ++b) {
        int iters = 0;
        for (int l = 0; l < 4; ++l) {
            int out = 4 * b + l;
            if (out < size_) iters = std::max(iters, static_cast<int>(pairs[out].size()));
        }
        plan_.block_iters.push_back(iters);
        plan_.block_start.push_back(start);
        for (int t = 0; t < iters; ++t)
            for (int l = 0; l < 4; ++l) {
                int out = 4 * b + l;
                if (out < size_ && t < static_cast<int>(pairs[out].size())) {
                    plan_.ia.push_back(static_cast<std::int32_t>(pairs[out][t].first));
                    plan_.ib.push_back(static_cast<std::int32_t>(pairs[out][t].second));
                } else {
                    plan_.ia.push_back(pad);
                    plan_.ib.push_back(pad);
                }
            }
        start += iters;
    }

    // Partial-derivative tables: d/dx_i maps monomial c_alpha to slot
    // alpha - e_i with factor alpha_i.
    for (int i = 0; i < n; ++i) {
        auto& t = deriv_[i];
        t.src.assign(size_, pad);
        t.fac.assign(size_, 0.0);
        for (int s = 0; s < size_; ++s) {
            if (exps_[s][i] == 0) continue;
            auto e = exps_[s];
            e[i] -= 1;
            int dst = slot_of(e);
            t.src[dst] = static_cast<std::int32_t>(s);
            t.fac[dst] = static_cast<double>(exps_[s][i]);
        }
    }
}

int JetSpace::slot_of(const std::array<std::uint8_t, kMaxVars>& e) const {
    int nz[3];
    int cnt = 0;
    int deg = 0;
    for (int v = 0; v < n_; ++v) {
        for (int r = 0; r < e[v]; ++r) {
            if (cnt < 3) nz[cnt] = v;
            ++cnt;
        }
        deg += e[v];
    }
    if (deg > kJetOrder) return -1;
    switch (deg) {
        case 0: return 0;
        case 1: return idx1(nz[0]);
        case 2: return idx2(nz[0], nz[1]);
        default: return idx3(nz[0], nz[1], nz[2]);
    }
}

const JetSpace& JetSpace::get(int n) {
    if (n < 1 || n > kMaxVars)
        throw std::out_of_range("JetSpace::get: variable count out of range");
    static const auto spaces = [] {
        std::array<std::unique_ptr<JetSpace>, kMaxVars> s;
        for (int k = 1; k <= kMaxVars; ++k) s[k - 1].reset(new JetSpace(k));
        return s;
    }();
    return *spaces[n - 1];
}

} // namespace riggeo
