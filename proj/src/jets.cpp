#include "riggeo/jets.hpp"

#include <cmath>

#include "riggeo/errors.hpp"
#include "riggeo/jet_kernels.hpp"

namespace riggeo {

namespace {

const JetSpace& same_space(const Jet3& a, const Jet3& b) {
    const JetSpace& sa = a.space();
    if (&sa != &b.space())
        throw JetError("jet arithmetic across different variable counts");
    return sa;
}

} // namespace

const JetSpace& Jet3::space() const {
    if (!space_) throw JetError("operation on a detached (default-constructed) jet");
    return *space_;
}

Jet3 Jet3::variable(const JetSpace& s, int i, double v) {
    if (i < 0 || i >= s.vars()) throw JetError("jet variable index out of range");
    Jet3 j(s);
    j.c_[0] = v;
    j.c_[s.idx1(i)] = 1.0;
    return j;
}

double Jet3::d1(int i) const { return c_[space().idx1(i)]; }

double Jet3::d2(int i, int j) const {
    const JetSpace& s = space();
    int slot = s.idx2(i, j);
    return c_[slot] * s.factorial(slot);
}

double Jet3::d3(int i, int j, int k) const {
    const JetSpace& s = space();
    int slot = s.idx3(i, j, k);
    return c_[slot] * s.factorial(slot);
}

Jet3 Jet3::derivative(int i) const {
    const JetSpace& s = space();
    if (i < 0 || i >= s.vars()) throw JetError("jet derivative index out of range");
    const auto& t = s.deriv_table(i);
    Jet3 out(s);
    for (int k = 0; k < s.size(); ++k) out.c_[k] = c_[t.src[k]] * t.fac[k];
    return out;
}

Jet3 Jet3::operator-() const {
    Jet3 out(space());
    kernels::active().scale(-1.0, c_.data(), out.c_.data());
    return out;
}

Jet3& Jet3::operator+=(const Jet3& o) {
    same_space(*this, o);
    kernels::active().add(c_.data(), o.c_.data(), c_.data());
    return *this;
}

Jet3& Jet3::operator-=(const Jet3& o) {
    same_space(*this, o);
    kernels::active().sub(c_.data(), o.c_.data(), c_.data());
    return *this;
}

Jet3& Jet3::operator*=(double v) {
    space();
    kernels::active().scale(v, c_.data(), c_.data());
    return *this;
}

Jet3 operator+(const Jet3& a, const Jet3& b) {
    Jet3 out(same_space(a, b));
    kernels::active().add(a.c_.data(), b.c_.data(), out.c_.data());
    return out;
}

Jet3 operator-(const Jet3& a, const Jet3& b) {
    Jet3 out(same_space(a, b));
    kernels::active().sub(a.c_.data(), b.c_.data(), out.c_.data());
    return out;
}

Jet3 operator*(const Jet3& a, const Jet3& b) {
    const JetSpace& s = same_space(a, b);
    Jet3 out(s);
    kernels::active().mul(s.mul_plan(), a.c_.data(), b.c_.data(), out.c_.data());
    return out;
}

Jet3 operator*(const Jet3& a, double v) {
    Jet3 out(a.space());
    kernels::active().scale(v, a.c_.data(), out.c_.data());
    return out;
}

Jet3 operator/(const Jet3& a, double v) {
    if (v == 0.0) throw JetError("jet division by zero constant");
    Jet3 out(a.space());
    for (int i = 0; i < kCoeffStride; ++i) out.c_[i] = a.c_[i] / v;
    return out;
}

Jet3 operator/(double v, const Jet3& a) {
    const double x = a.value();
    if (x == 0.0) throw JetError("jet reciprocal at a zero value part");
    // f(t) = v/t expanded at x; the value slot is the exact division v/x.
    const double r = v / x;
    return compose({r, -r / x, 2.0 * r / (x * x), -6.0 * r / (x * x * x)}, a);
}

Jet3 operator-(double v, const Jet3& a) {
    Jet3 out = -a;
    out.c_[0] = v + out.c_[0];
    return out;
}

Jet3 operator/(const Jet3& a, const Jet3& b) {
    same_space(a, b);
    const double b0 = b.value();
    if (b0 == 0.0) throw JetError("jet division by a jet with zero value part");
    Jet3 out = a * (1.0 / b);
    // Reciprocal-then-multiply rounds the value slot as a0*(1/b0); pin it to
    // the single division the plain evaluator performs.
    out.mono(0) = a.value() / b0;
    return out;
}

Jet3 compose(const UnivariateDerivs& rule, const Jet3& a) {
    const JetSpace& s = a.space();
    Jet3 w = a;
    w.mono(0) = 0.0;
    const Jet3 w2 = w * w;
    const Jet3 w3 = w2 * w;
    Jet3 out = Jet3::constant(s, rule.f0);
    const auto& k = kernels::active();
    k.axpy(rule.f1, w.data(), out.data());
    k.axpy(rule.f2 / 2.0, w2.data(), out.data());
    k.axpy(rule.f3 / 6.0, w3.data(), out.data());
    // w, w2, w3 all have zero value slots, so out.value() is rule.f0 plus
    // three exact-zero contributions; keep it bit-equal to f0 regardless.
    out.mono(0) = rule.f0;
    return out;
}

Jet3 pow_int(const Jet3& a, int n) {
    if (n == 0) return Jet3::constant(a.space(), 1.0);
    const int m = n > 0 ? n : -n;
    Jet3 acc = a;
    for (int i = 1; i < m; ++i) acc = acc * a;
    if (n > 0) return acc;
    return 1.0 / acc;
}

double pow_int(double a, int n) {
    if (n == 0) return 1.0;
    const int m = n > 0 ? n : -n;
    double acc = a;
    for (int i = 1; i < m; ++i) acc = acc * a;
    if (n > 0) return acc;
    return 1.0 / acc;
}

Jet3 sqrt_jet(const Jet3& a) {
    const double x = a.value();
    if (!(x > 0.0)) throw JetError("jet sqrt requires a positive value part");
    const double r = std::sqrt(x);
    return compose({r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x)}, a);
}

} // namespace riggeo
