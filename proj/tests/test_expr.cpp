#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "doctest.h"
#include "riggeo/expr.hpp"
#include "test_support.hpp"

using namespace riggeo;
using testsupport::SplitMix64;

namespace {

const std::vector<std::string> kTXYZ = {"t", "x", "y", "z"};

double eval_str(const std::string& src, std::vector<double> at,
                const std::vector<std::string>& coords = kTXYZ) {
    return CompiledExpr::compile(src, coords).eval(at);
}

} // namespace

TEST_CASE("numbers, precedence, associativity") {
    CHECK(eval_str("1 + 2*3", {0, 0, 0, 0}) == 7.0);
    CHECK(eval_str("(1 + 2)*3", {0, 0, 0, 0}) == 9.0);
    CHECK(eval_str("2^3", {0, 0, 0, 0}) == 8.0);
    CHECK(eval_str("-2^2", {0, 0, 0, 0}) == -4.0);     // unary minus binds looser than ^
    CHECK(eval_str("2*x^2", {0, 3, 0, 0}) == 18.0);    // ^ binds tighter than *
    CHECK(eval_str("10 - 4 - 3", {0, 0, 0, 0}) == 3.0);  // left associative
    CHECK(eval_str("24/4/2", {0, 0, 0, 0}) == 3.0);
    CHECK(eval_str("1.5e2 + 1e-2", {0, 0, 0, 0}) == doctest::Approx(150.01));
    CHECK(eval_str("x^(-2)", {0, 2, 0, 0}) == 0.25);
    CHECK(eval_str("x^0.5", {0, 9, 0, 0}) == 3.0);
    CHECK(eval_str("--x", {0, 5, 0, 0}) == 5.0);
}

TEST_CASE("builtin functions evaluate through the std library") {
    // volatile blocks compile-time folding, which can round differently from
    // the runtime libm the engine actually calls
    volatile double arg = 0.7;
    CHECK(eval_str("sin(x)", {0, 0.7, 0, 0}) == std::sin(arg));
    CHECK(eval_str("cos(x)", {0, 0.7, 0, 0}) == std::cos(arg));
    CHECK(eval_str("exp(x)", {0, 0.7, 0, 0}) == std::exp(arg));
    CHECK(eval_str("log(x)", {0, 0.7, 0, 0}) == std::log(arg));
    CHECK(eval_str("sqrt(x)", {0, 0.7, 0, 0}) == std::sqrt(arg));
    CHECK(eval_str("tanh(x)", {0, 0.7, 0, 0}) == std::tanh(arg));
}

TEST_CASE("parse errors report the end of the last consumed token") {
    // "2*d u": 'd' parses as a variable; 'u' is unexpected; offset is 3
    try {
        parse_expression("2*d u");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 3);
        CHECK(std::string(e.what()).find("identifier 'u'") != std::string::npos);
    }
    try {
        parse_expression("1 + ");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 3);  // end of '+'
    }
    try {
        parse_expression("(x + y");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 6);
    }
    CHECK_THROWS_AS(parse_expression("x^y"), ParseError);     // non-literal exponent
    CHECK_THROWS_AS(parse_expression("x^-2"), ParseError);    // needs parens
    CHECK_THROWS_AS(parse_expression("1..2"), ParseError);
    CHECK_THROWS_AS(parse_expression("1e"), ParseError);
    CHECK_THROWS_AS(parse_expression("$x"), ParseError);
    CHECK_THROWS_AS(parse_expression("x y"), ParseError);     // no implicit multiplication
    CHECK_THROWS_AS(parse_expression(""), ParseError);
}

TEST_CASE("binding errors name the unknown identifier and known coordinates") {
    try {
        CompiledExpr::compile("t + q", kTXYZ);
        FAIL("expected BindError");
    } catch (const BindError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("'q'") != std::string::npos);
        CHECK(msg.find("t, x, y, z") != std::string::npos);
        CHECK(e.offset() == 4);
    }
    CHECK_THROWS_AS(CompiledExpr::compile("sinh(x)", kTXYZ), BindError);
}

TEST_CASE("domain errors carry the offending subexpression") {
    auto ce = CompiledExpr::compile("1/(t - x)", kTXYZ);
    try {
        ce.eval(std::vector<double>{1.0, 1.0, 0, 0});
        FAIL("expected EvalError");
    } catch (const EvalError& e) {
        CHECK(std::string(e.what()).find("division by zero") != std::string::npos);
        CHECK(std::string(e.what()).find("1/(t - x)") != std::string::npos);
    }
    CHECK_THROWS_AS(eval_str("log(t)", {-1, 0, 0, 0}), EvalError);
    CHECK_THROWS_AS(eval_str("sqrt(t)", {-1, 0, 0, 0}), EvalError);
    CHECK_THROWS_AS(eval_str("t^0.5", {-1, 0, 0, 0}), EvalError);
    CHECK_THROWS_AS(eval_str("t^(-1)", {0, 0, 0, 0}), EvalError);
    // plain sqrt(0) is fine, jet sqrt(0) is not (derivative blows up)
    CHECK(eval_str("sqrt(t)", {0, 0, 0, 0}) == 0.0);
    auto sq = CompiledExpr::compile("sqrt(t)", kTXYZ);
    const JetSpace& s = JetSpace::get(4);
    std::vector<Jet3> jz;
    for (int i = 0; i < 4; ++i) jz.push_back(Jet3::variable(s, i, 0.0));
    CHECK_THROWS_AS(sq.eval_jet(jz), EvalError);
}

TEST_CASE("canonical formatting round-trips and is idempotent") {
    const char* cases[] = {
        "x",
        "1 + 2*x",
        "-x^2",
        "-(x*y)",
        "x^(-2)",
        "(x + y)^2",
        "sin(x*y) + cos(t)",
        "t - (x - y)",
        "2*x^2 + 3*x*y - z/t",
        "x/(y*z)",
        "sqrt(x^2 + y^2 + z^2)",
        "1.5e-07*x",
        "tanh(x/2)",
    };
    for (const char* c : cases) {
        ExprPtr e1 = parse_expression(c);
        const std::string s1 = format_expression(*e1);
        ExprPtr e2 = parse_expression(s1);
        const std::string s2 = format_expression(*e2);
        CHECK(s1 == s2);
        // canonical text evaluates identically to the original
        auto c1 = CompiledExpr::compile(c, kTXYZ);
        auto c2 = CompiledExpr::compile(s1, kTXYZ);
        SplitMix64 rng(0x9001ULL);
        for (int rep = 0; rep < 10; ++rep) {
            std::vector<double> at{rng.in(0.5, 2), rng.in(0.5, 2), rng.in(0.5, 2),
                                   rng.in(0.5, 2)};
            CHECK(c1.eval(at) == c2.eval(at));
        }
    }
}

TEST_CASE("random expression trees round-trip through the formatter") {
    SplitMix64 rng(0xf00dULL);
    // build random ASTs from a small grammar and check format->parse->format
    // is a fixed point
    std::function<ExprPtr(int)> gen = [&](int depth) -> ExprPtr {
        auto mk = [](Expr e) { return std::make_shared<const Expr>(std::move(e)); };
        const int pick = static_cast<int>(rng.next() % (depth > 3 ? 2 : 8));
        switch (pick) {
            case 0: return mk({Expr::Kind::number, std::floor(rng.in(0, 50)) / 4.0, {},
                               nullptr, nullptr, {}});
            case 1: {
                const char* names[] = {"t", "x", "y", "z"};
                return mk({Expr::Kind::variable, 0.0, names[rng.next() % 4], nullptr,
                           nullptr, {}});
            }
            case 2: return mk({Expr::Kind::add, 0.0, {}, gen(depth + 1), gen(depth + 1), {}});
            case 3: return mk({Expr::Kind::sub, 0.0, {}, gen(depth + 1), gen(depth + 1), {}});
            case 4: return mk({Expr::Kind::mul, 0.0, {}, gen(depth + 1), gen(depth + 1), {}});
            case 5: return mk({Expr::Kind::neg, 0.0, {}, gen(depth + 1), nullptr, {}});
            case 6: {
                ExprPtr exp = mk({Expr::Kind::number, static_cast<double>(1 + rng.next() % 3),
                                  {}, nullptr, nullptr, {}});
                return mk({Expr::Kind::pow, 0.0, {}, gen(depth + 1), exp, {}});
            }
            default: {
                const char* fns[] = {"sin", "cos", "exp", "tanh"};
                return mk({Expr::Kind::call, 0.0, fns[rng.next() % 4], gen(depth + 1),
                           nullptr, {}});
            }
        }
    };
    for (int rep = 0; rep < 200; ++rep) {
        ExprPtr e = gen(0);
        const std::string s1 = format_expression(*e);
        const std::string s2 = format_expression(*parse_expression(s1));
        CHECK(s1 == s2);
    }
}

TEST_CASE("jet evaluation with zero seeds is bit-identical to plain evaluation") {
    const char* cases[] = {
        "sin(x*y) + exp(0.3*t)",
        "(t + x)/(y + 2.5)",
        "sqrt(x^2 + y^2 + 1)",
        "x^3 - 2*x^2 + x - 7",
        "tanh(x)*log(y + 3)",
        "x^(-2) + y^0.5",
        "cos(x)^2 + sin(x)^2",
        "1/(1 + x^2)",
    };
    SplitMix64 rng(0xbee5ULL);
    const JetSpace& s = JetSpace::get(4);
    for (const char* c : cases) {
        auto ce = CompiledExpr::compile(c, kTXYZ);
        for (int rep = 0; rep < 25; ++rep) {
            std::vector<double> at{rng.in(0.5, 2), rng.in(0.5, 2), rng.in(0.5, 2),
                                   rng.in(0.5, 2)};
            std::vector<Jet3> seeds;
            for (int i = 0; i < 4; ++i) seeds.push_back(Jet3::constant(s, at[i]));
            const double plain = ce.eval(at);
            const double viajet = ce.eval_jet(seeds).value();
            CHECK(plain == viajet);  // bitwise, not approximate
        }
    }
}

TEST_CASE("jet evaluation derivatives match finite differences") {
    using testsupport::fd1;
    using testsupport::fd2;
    using testsupport::fd3;
    auto ce = CompiledExpr::compile("sin(x*y)/(1 + t^2) + sqrt(z + 2)", kTXYZ);
    auto f = [&](const std::vector<double>& v) { return ce.eval(v); };
    const std::vector<double> at{0.3, 0.8, -0.6, 0.4};
    const JetSpace& s = JetSpace::get(4);
    std::vector<Jet3> seeds;
    for (int i = 0; i < 4; ++i) seeds.push_back(Jet3::variable(s, i, at[i]));
    Jet3 j = ce.eval_jet(seeds);
    for (int i = 0; i < 4; ++i)
        CHECK(j.d1(i) == doctest::Approx(fd1(f, at, i)).epsilon(1e-8));
    for (int i = 0; i < 4; ++i)
        for (int k = i; k < 4; ++k)
            CHECK(j.d2(i, k) == doctest::Approx(fd2(f, at, i, k)).epsilon(1e-6).scale(1.0));
    CHECK(j.d3(0, 1, 1) == doctest::Approx(fd3(f, at, 0, 1, 1)).epsilon(1e-4).scale(1.0));
    CHECK(j.d3(1, 1, 1) == doctest::Approx(fd3(f, at, 1, 1, 1)).epsilon(1e-4).scale(1.0));
}

TEST_CASE("uses_var reports coordinate dependence") {
    auto ce = CompiledExpr::compile("x*z + 1", kTXYZ);
    CHECK(!ce.uses_var(0));
    CHECK(ce.uses_var(1));
    CHECK(!ce.uses_var(2));
    CHECK(ce.uses_var(3));
}
