#include "riggeo/linalg.hpp"

#include <cmath>

#include "riggeo/errors.hpp"

namespace riggeo {

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat mat_mul(const Mat& x, const Mat& y) {
    if (x.cols != y.rows) throw NumericsError("mat_mul: shape mismatch");
    Mat out(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            const double v = x(i, k);
            for (int j = 0; j < y.cols; ++j) out(i, j) += v * y(k, j);
        }
    return out;
}

std::vector<double> mat_vec(const Mat& x, std::span<const double> v) {
    if (x.cols != static_cast<int>(v.size())) throw NumericsError("mat_vec: shape mismatch");
    std::vector<double> out(x.rows, 0.0);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) out[i] += x(i, j) * v[j];
    return out;
}

namespace {

// In-place LU with partial pivoting; perm holds the row order. Returns the
// permutation sign, throws when a pivot is numerically zero.
double lu_factor(Mat& A, std::vector<int>& perm) {
    const int n = A.rows;
    perm.resize(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    double sign = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        double best = std::abs(A(perm[c], c));
        for (int r = c + 1; r < n; ++r) {
            const double v = std::abs(A(perm[r], c));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best < 1e-300) throw NumericsError("LU: matrix is singular to working precision");
        if (piv != c) {
            std::swap(perm[piv], perm[c]);
            sign = -sign;
        }
        const double d = A(perm[c], c);
        for (int r = c + 1; r < n; ++r) {
            const double f = A(perm[r], c) / d;
            A(perm[r], c) = f;
            for (int j = c + 1; j < n; ++j) A(perm[r], j) -= f * A(perm[c], j);
        }
    }
    return sign;
}

} // namespace

std::vector<double> lu_solve(Mat A, std::vector<double> b) {
    if (A.rows != A.cols || A.rows != static_cast<int>(b.size()))
        throw NumericsError("lu_solve: shape mismatch");
    const int n = A.rows;
    std::vector<int> perm;
    lu_factor(A, perm);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
        double s = b[perm[i]];
        for (int j = 0; j < i; ++j) s -= A(perm[i], j) * x[j];
        x[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int j = i + 1; j < n; ++j) s -= A(perm[i], j) * x[j];
        x[i] = s / A(perm[i], i);
    }
    return x;
}

Mat mat_inverse(const Mat& A) {
    if (A.rows != A.cols) throw NumericsError("mat_inverse: not square");
    const int n = A.rows;
    Mat lu = A;
    std::vector<int> perm;
    lu_factor(lu, perm);
    Mat out(n, n);
    std::vector<double> x(n), b(n);
    for (int col = 0; col < n; ++col) {
        for (int i = 0; i < n; ++i) b[i] = i == col ? 1.0 : 0.0;
        for (int i = 0; i < n; ++i) {
            double s = b[perm[i]];
            for (int j = 0; j < i; ++j) s -= lu(perm[i], j) * x[j];
            x[i] = s;
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = x[i];
            for (int j = i + 1; j < n; ++j) s -= lu(perm[i], j) * x[j];
            x[i] = s / lu(perm[i], i);
        }
        for (int i = 0; i < n; ++i) out(i, col) = x[i];
    }
    return out;
}

double determinant(Mat A) {
    if (A.rows != A.cols) throw NumericsError("determinant: not square");
    std::vector<int> perm;
    double sign;
    try {
        sign = lu_factor(A, perm);
    } catch (const NumericsError&) {
        return 0.0;
    }
    double d = sign;
    for (int i = 0; i < A.rows; ++i) d *= A(perm[i], i);
    return d;
}

std::vector<double> sym_eigenvalues(Mat A) {
    if (A.rows != A.cols) throw NumericsError("sym_eigenvalues: not square");
    const int n = A.rows;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (off < 1e-28) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = A(i, i);
    for (int i = 1; i < n; ++i)
        for (int j = i; j > 0 && ev[j - 1] > ev[j]; --j) std::swap(ev[j - 1], ev[j]);
    return ev;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

} // namespace riggeo
