#pragma once

#include <span>
#include <vector>

namespace riggeo {

/// Dense row-major matrix. Everything in this engine is tiny (dimension <= 9),
/// so no cleverness: plain loops, partial-pivot LU, Jacobi eigenvalues.
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
    static Mat identity(int n);

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const {
        return a[static_cast<std::size_t>(i) * cols + j];
    }
};

Mat mat_mul(const Mat& x, const Mat& y);
std::vector<double> mat_vec(const Mat& x, std::span<const double> v);

/// Solve A x = b by partial-pivot LU; throws NumericsError when singular.
std::vector<double> lu_solve(Mat A, std::vector<double> b);
Mat mat_inverse(const Mat& A);
double determinant(Mat A);

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
std::vector<double> sym_eigenvalues(Mat A);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

} // namespace riggeo
