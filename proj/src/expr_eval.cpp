#include <cmath>
#include <cstdio>

#include "riggeo/expr.hpp"

namespace riggeo {

namespace {

// ---------------------------------------------------------------------------
// built-in univariate functions with their chain-rule data
// ---------------------------------------------------------------------------

struct FunctionRule {
    std::string_view name;
    double (*value)(double);
    UnivariateDerivs (*derivs)(double);
    // Domain guards; jets are stricter than plain values where the derivative
    // blows up on the boundary (sqrt at 0).
    bool (*plain_ok)(double);
    bool (*jet_ok)(double);
    const char* domain_msg;
};

bool always(double) { return true; }
bool positive(double x) { return x > 0.0; }
bool nonnegative(double x) { return x >= 0.0; }

const FunctionRule kFunctions[] = {
    {"sin", [](double x) { return std::sin(x); },
     [](double x) {
         const double s = std::sin(x), c = std::cos(x);
         return UnivariateDerivs{s, c, -s, -c};
     },
     &always, &always, ""},
    {"cos", [](double x) { return std::cos(x); },
     [](double x) {
         const double s = std::sin(x), c = std::cos(x);
         return UnivariateDerivs{c, -s, -c, s};
     },
     &always, &always, ""},
    {"exp", [](double x) { return std::exp(x); },
     [](double x) {
         const double e = std::exp(x);
         return UnivariateDerivs{e, e, e, e};
     },
     &always, &always, ""},
    {"log", [](double x) { return std::log(x); },
     [](double x) {
         return UnivariateDerivs{std::log(x), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)};
     },
     &positive, &positive, "log requires a positive argument"},
    {"sqrt", [](double x) { return std::sqrt(x); },
     [](double x) {
         const double r = std::sqrt(x);
         return UnivariateDerivs{r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x)};
     },
     &nonnegative, &positive, "sqrt requires a non-negative argument (positive for derivatives)"},
    {"tanh", [](double x) { return std::tanh(x); },
     [](double x) {
         const double t = std::tanh(x);
         const double s = 1.0 - t * t;
         return UnivariateDerivs{t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0)};
     },
     &always, &always, ""},
};

constexpr int kNumFunctions = static_cast<int>(sizeof kFunctions / sizeof kFunctions[0]);

int find_function(std::string_view name) {
    for (int i = 0; i < kNumFunctions; ++i)
        if (kFunctions[i].name == name) return i;
    return -1;
}

std::string describe(const Expr& node) {
    return "'" + format_expression(node) + "' at offset " + std::to_string(node.span.begin);
}

[[noreturn]] void domain_error(const std::string& what, const Expr& node, double where) {
    char val[40];
    std::snprintf(val, sizeof val, "%.17g", where);
    throw EvalError("domain error: " + what + " (argument value " + val + ") in " +
                        describe(node),
                    node.span);
}

// Integer exponents within this range go through repeated multiplication;
// everything else uses the real-power chain rule.
bool integer_exponent(double e, int& out) {
    if (!(e == e) || e < -64.0 || e > 64.0) return false;
    if (e != static_cast<double>(static_cast<int>(e))) return false;
    out = static_cast<int>(e);
    return true;
}

double exponent_value(const Expr& e) {
    if (e.kind == Expr::Kind::number) return e.number;
    // parser guarantees neg-of-literal otherwise
    return -exponent_value(*e.a);
}

} // namespace

std::span<const std::string_view> builtin_function_names() {
    static const std::string_view names[kNumFunctions] = {
        kFunctions[0].name, kFunctions[1].name, kFunctions[2].name,
        kFunctions[3].name, kFunctions[4].name, kFunctions[5].name,
    };
    return {names, kNumFunctions};
}

// ---------------------------------------------------------------------------
// compilation to a postfix program
// ---------------------------------------------------------------------------

CompiledExpr CompiledExpr::compile(std::string_view source,
                                   std::span<const std::string> coords) {
    return compile(parse_expression(source), std::string(source), coords);
}

CompiledExpr CompiledExpr::compile(ExprPtr ast, std::string source,
                                   std::span<const std::string> coords) {
    CompiledExpr ce;
    ce.root_ = std::move(ast);
    ce.source_ = std::move(source);
    ce.arity_ = static_cast<int>(coords.size());

    int depth = 0;
    const auto emit = [&](VmOp op, int pops, int pushes) {
        depth += pushes - pops;
        ce.stack_need_ = std::max(ce.stack_need_, depth);
        ce.ops_.push_back(op);
    };

    const auto walk = [&](const auto& self, const Expr& e) -> void {
        switch (e.kind) {
            case Expr::Kind::number:
                emit({VmOp::K::num, 0, e.number, &e}, 0, 1);
                return;
            case Expr::Kind::variable: {
                for (int i = 0; i < static_cast<int>(coords.size()); ++i)
                    if (coords[i] == e.name) {
                        emit({VmOp::K::var, i, 0.0, &e}, 0, 1);
                        return;
                    }
                std::string known;
                for (const auto& c : coords) {
                    if (!known.empty()) known += ", ";
                    known += c;
                }
                throw BindError("unknown identifier '" + e.name + "' at offset " +
                                    std::to_string(e.span.begin) +
                                    "; known coordinates: " + known,
                                e.span.begin);
            }
            case Expr::Kind::neg:
                self(self, *e.a);
                emit({VmOp::K::neg, 0, 0.0, &e}, 1, 1);
                return;
            case Expr::Kind::add:
            case Expr::Kind::sub:
            case Expr::Kind::mul:
            case Expr::Kind::div: {
                self(self, *e.a);
                self(self, *e.b);
                VmOp::K k = e.kind == Expr::Kind::add   ? VmOp::K::add
                            : e.kind == Expr::Kind::sub ? VmOp::K::sub
                            : e.kind == Expr::Kind::mul ? VmOp::K::mul
                                                        : VmOp::K::div;
                emit({k, 0, 0.0, &e}, 2, 1);
                return;
            }
            case Expr::Kind::pow: {
                self(self, *e.a);
                const double p = exponent_value(*e.b);
                int ip = 0;
                if (integer_exponent(p, ip))
                    emit({VmOp::K::pow_i, ip, 0.0, &e}, 1, 1);
                else
                    emit({VmOp::K::pow_r, 0, p, &e}, 1, 1);
                return;
            }
            case Expr::Kind::call: {
                const int f = find_function(e.name);
                if (f < 0)
                    throw BindError("unknown function '" + e.name + "' at offset " +
                                        std::to_string(e.span.begin),
                                    e.span.begin);
                self(self, *e.a);
                emit({VmOp::K::call, f, 0.0, &e}, 1, 1);
                return;
            }
        }
    };
    walk(walk, *ce.root_);
    return ce;
}

bool CompiledExpr::uses_var(int slot) const {
    for (const auto& op : ops_)
        if (op.k == VmOp::K::var && op.i == slot) return true;
    return false;
}

// ---------------------------------------------------------------------------
// evaluation: one engine, two value types
// ---------------------------------------------------------------------------

namespace {

struct DoubleCtx {
    std::span<const double> xs;
    using Value = double;
    double load(int slot) const { return xs[slot]; }
    static double lift(double v, const double&) { return v; }
    static double val(const double& v) { return v; }
    static bool fn_ok(const FunctionRule& f, double x) { return f.plain_ok(x); }
    static double call(const FunctionRule& f, const double& x) { return f.value(x); }
    static double powr(const double& x, double p) { return std::pow(x, p); }
};

struct JetCtx {
    std::span<const Jet3> xs;
    using Value = Jet3;
    const Jet3& load(int slot) const { return xs[slot]; }
    static Jet3 lift(double v, const Jet3& like) {
        return Jet3::constant(like.space(), v);
    }
    static double val(const Jet3& v) { return v.value(); }
    static bool fn_ok(const FunctionRule& f, double x) { return f.jet_ok(x); }
    static Jet3 call(const FunctionRule& f, const Jet3& x) {
        return compose(f.derivs(x.value()), x);
    }
    static Jet3 powr(const Jet3& x, double p) {
        const double x0 = x.value();
        const double f0 = std::pow(x0, p);
        return compose({f0, p * f0 / x0, p * (p - 1.0) * f0 / (x0 * x0),
                        p * (p - 1.0) * (p - 2.0) * f0 / (x0 * x0 * x0)},
                       x);
    }
};

} // namespace

template <class T, class Ctx>
T CompiledExpr::run(const Ctx& ctx) const {
    std::vector<T> stack;
    stack.reserve(static_cast<std::size_t>(stack_need_));
    const auto pop = [&]() -> T {
        T v = std::move(stack.back());
        stack.pop_back();
        return v;
    };
    for (const auto& op : ops_) {
        switch (op.k) {
            case VmOp::K::num: {
                // Literals need a space to live in when evaluating jets; any
                // operand on the stack or an input jet provides one.
                if constexpr (std::is_same_v<T, Jet3>) {
                    if (!ctx.xs.empty())
                        stack.push_back(Ctx::lift(op.x, ctx.xs[0]));
                    else
                        throw JetError("jet evaluation needs at least one coordinate jet");
                } else {
                    stack.push_back(op.x);
                }
                break;
            }
            case VmOp::K::var:
                stack.push_back(ctx.load(op.i));
                break;
            case VmOp::K::neg: {
                T a = pop();
                stack.push_back(-a);
                break;
            }
            case VmOp::K::add: {
                T b = pop(), a = pop();
                stack.push_back(a + b);
                break;
            }
            case VmOp::K::sub: {
                T b = pop(), a = pop();
                stack.push_back(a - b);
                break;
            }
            case VmOp::K::mul: {
                T b = pop(), a = pop();
                stack.push_back(a * b);
                break;
            }
            case VmOp::K::div: {
                T b = pop(), a = pop();
                if (Ctx::val(b) == 0.0)
                    domain_error("division by zero", *op.node, 0.0);
                stack.push_back(a / b);
                break;
            }
            case VmOp::K::pow_i: {
                T a = pop();
                if (op.i < 0 && Ctx::val(a) == 0.0)
                    domain_error("zero raised to a negative power", *op.node, 0.0);
                stack.push_back(pow_int(a, op.i));
                break;
            }
            case VmOp::K::pow_r: {
                T a = pop();
                if (!(Ctx::val(a) > 0.0))
                    domain_error("fractional power of a non-positive base", *op.node,
                                 Ctx::val(a));
                stack.push_back(Ctx::powr(a, op.x));
                break;
            }
            case VmOp::K::call: {
                T a = pop();
                const FunctionRule& f = kFunctions[op.i];
                if (!Ctx::fn_ok(f, Ctx::val(a)))
                    domain_error(f.domain_msg, *op.node, Ctx::val(a));
                stack.push_back(Ctx::call(f, a));
                break;
            }
        }
    }
    return std::move(stack.back());
}

double CompiledExpr::eval(std::span<const double> xs) const {
    if (!valid()) throw Error("evaluating an empty CompiledExpr");
    if (static_cast<int>(xs.size()) != arity_)
        throw Error("CompiledExpr::eval: expected " + std::to_string(arity_) +
                    " coordinate values, got " + std::to_string(xs.size()));
    return run<double>(DoubleCtx{xs});
}

Jet3 CompiledExpr::eval_jet(std::span<const Jet3> xs) const {
    if (!valid()) throw Error("evaluating an empty CompiledExpr");
    if (static_cast<int>(xs.size()) != arity_)
        throw Error("CompiledExpr::eval_jet: expected " + std::to_string(arity_) +
                    " coordinate jets, got " + std::to_string(xs.size()));
    return run<Jet3>(JetCtx{xs});
}

} // namespace riggeo
