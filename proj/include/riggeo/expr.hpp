#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "riggeo/errors.hpp"
#include "riggeo/jets.hpp"

namespace riggeo {

/// Half-open byte range [begin, end) into the source text.
struct SourceSpan {
    int begin = 0;
    int end = 0;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable syntax tree. `pow` keeps its exponent as a literal child (the
/// grammar only admits numeric-literal exponents); `call` has exactly one
/// argument in `a`.
struct Expr {
    enum class Kind { number, variable, neg, add, sub, mul, div, pow, call };

    Kind kind;
    double number = 0.0;  ///< Kind::number
    std::string name;     ///< Kind::variable / Kind::call
    ExprPtr a, b;
    SourceSpan span;
};

/// Syntax error. `offset()` is a byte offset into the source: for an
/// unexpected token it is the end of the last successfully consumed token;
/// for a lexical error it is the offending character.
class ParseError : public Error {
public:
    ParseError(std::string what, int offset)
        : Error(std::move(what)), offset_(offset) {}
    int offset() const { return offset_; }

private:
    int offset_;
};

/// Name-resolution failure (unknown coordinate or function).
class BindError : public Error {
public:
    BindError(std::string what, int offset)
        : Error(std::move(what)), offset_(offset) {}
    int offset() const { return offset_; }

private:
    int offset_;
};

/// Runtime domain violation (log of a non-positive number, division by zero,
/// fractional power of a non-positive base, ...). Carries the span of the
/// offending subexpression.
class EvalError : public Error {
public:
    EvalError(std::string what, SourceSpan where)
        : Error(std::move(what)), where_(where) {}
    SourceSpan where() const { return where_; }

private:
    SourceSpan where_;
};

/// Parse the full text as one expression; trailing input is an error.
ExprPtr parse_expression(std::string_view text);

/// Canonical form: minimal parentheses, shortest round-tripping number
/// literals. parse(format(e)) reproduces e, and formatting is idempotent.
std::string format_expression(const Expr& e);

/// An expression bound to an ordered coordinate list and flattened into a
/// little postfix program, evaluatable over plain doubles or over jets with
/// the identical operation sequence (zero-seeded jet evaluation reproduces
/// the plain value bit-for-bit on the common domain).
class CompiledExpr {
public:
    CompiledExpr() = default;

    static CompiledExpr compile(std::string_view source,
                                std::span<const std::string> coords);
    static CompiledExpr compile(ExprPtr ast, std::string source,
                                std::span<const std::string> coords);

    bool valid() const { return root_ != nullptr; }
    const std::string& source() const { return source_; }
    const ExprPtr& ast() const { return root_; }
    int arity() const { return arity_; }
    bool uses_var(int slot) const;

    /// Plain evaluation; xs.size() must equal arity().
    double eval(std::span<const double> xs) const;
    /// Jet evaluation; all jets must share one space.
    Jet3 eval_jet(std::span<const Jet3> xs) const;

private:
    struct VmOp {
        enum class K { num, var, add, sub, mul, div, neg, pow_i, pow_r, call };
        K k;
        int i = 0;       // var slot / function index / integer exponent
        double x = 0.0;  // literal / real exponent
        const Expr* node = nullptr;
    };

    template <class T, class Ctx>
    T run(const Ctx& ctx) const;

    ExprPtr root_;
    std::string source_;
    int arity_ = 0;
    std::vector<VmOp> ops_;
    int stack_need_ = 0;
};

/// Names of the built-in univariate functions, in registry order.
std::span<const std::string_view> builtin_function_names();

} // namespace riggeo
