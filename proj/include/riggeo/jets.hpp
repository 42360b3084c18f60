#pragma once

#include <array>

#include "riggeo/jet_space.hpp"

namespace riggeo {

/// Coefficients of a univariate function needed to push it through a jet:
/// value and first three derivatives at the expansion point.
struct UnivariateDerivs {
    double f0, f1, f2, f3;
};

/// Truncated multivariate Taylor expansion: total order 3 in space().vars()
/// variables. Coefficients are stored per *monomial* (c_alpha = d^alpha f / alpha!)
/// in the degree-blocked order of JetSpace. Slots past size() are kept at
/// exactly zero so the padded multiplication plans can read them freely.
///
/// Value semantics throughout; all arithmetic funnels through the runtime-
/// selected coefficient kernels (scalar or AVX2, bit-identical by design).
class Jet3 {
public:
    /// Detached jet; using it in arithmetic throws. Exists so containers can
    /// default-construct.
    Jet3() : space_(nullptr), c_{} {}

    /// Zero jet in the given space.
    explicit Jet3(const JetSpace& s) : space_(&s), c_{} {}

    static Jet3 constant(const JetSpace& s, double v) {
        Jet3 j(s);
        j.c_[0] = v;
        return j;
    }

    /// Taylor expansion of the coordinate function x_i around value v.
    static Jet3 variable(const JetSpace& s, int i, double v);

    const JetSpace& space() const;
    bool valid() const { return space_ != nullptr; }
    int vars() const { return space().vars(); }
    int size() const { return space().size(); }

    double value() const { return c_[0]; }
    /// First partial d f / d x_i.
    double d1(int i) const;
    /// Second partial d^2 f / (d x_i d x_j), any index order.
    double d2(int i, int j) const;
    /// Third partial d^3 f / (d x_i d x_j d x_k), any index order.
    double d3(int i, int j, int k) const;

    /// Raw monomial coefficient access.
    double mono(int slot) const { return c_[slot]; }
    double& mono(int slot) { return c_[slot]; }
    const double* data() const { return c_.data(); }
    double* data() { return c_.data(); }

    /// Jet of d f / d x_i (degree-3 coefficients of the result are zero:
    /// differentiation loses one order of trustworthy data).
    Jet3 derivative(int i) const;

    Jet3 operator-() const;
    Jet3& operator+=(const Jet3& o);
    Jet3& operator-=(const Jet3& o);
    Jet3& operator*=(const Jet3& o) { return *this = *this * o; }
    Jet3& operator+=(double v) {
        c_[0] += v;
        return *this;
    }
    Jet3& operator-=(double v) {
        c_[0] -= v;
        return *this;
    }
    Jet3& operator*=(double v);

    friend Jet3 operator+(const Jet3& a, const Jet3& b);
    friend Jet3 operator-(const Jet3& a, const Jet3& b);
    friend Jet3 operator*(const Jet3& a, const Jet3& b);
    /// Truncated quotient; requires b.value() != 0.
    friend Jet3 operator/(const Jet3& a, const Jet3& b);

    friend Jet3 operator+(const Jet3& a, double v) {
        Jet3 r = a;
        r.c_[0] += v;
        return r;
    }
    friend Jet3 operator+(double v, const Jet3& a) { return a + v; }
    friend Jet3 operator-(const Jet3& a, double v) {
        Jet3 r = a;
        r.c_[0] -= v;
        return r;
    }
    friend Jet3 operator-(double v, const Jet3& a);
    friend Jet3 operator*(const Jet3& a, double v);
    friend Jet3 operator*(double v, const Jet3& a) { return a * v; }
    /// Elementwise divide: value slot gets the exact a.value()/v.
    friend Jet3 operator/(const Jet3& a, double v);
    friend Jet3 operator/(double v, const Jet3& a);

private:
    const JetSpace* space_;
    alignas(32) std::array<double, kCoeffStride> c_;
};

/// Chain rule through a univariate function: given f's derivatives at
/// a.value(), returns the expansion of f(a). The result's value slot is
/// exactly rule.f0.
Jet3 compose(const UnivariateDerivs& rule, const Jet3& a);

/// a^n by left-fold repeated multiplication (negative n via one reciprocal).
Jet3 pow_int(const Jet3& a, int n);
/// Mirror of pow_int on plain doubles: the identical operation sequence, so
/// jet evaluation with zero seeds reproduces plain evaluation bit-for-bit.
double pow_int(double a, int n);

/// sqrt through the chain rule; requires a.value() > 0.
Jet3 sqrt_jet(const Jet3& a);

} // namespace riggeo
