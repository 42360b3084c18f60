#include <cctype>
#include <charconv>
#include <cmath>

#include "riggeo/expr.hpp"

namespace riggeo {

namespace {

// ---------------------------------------------------------------------------
// lexer
// ---------------------------------------------------------------------------

struct Token {
    enum class Type { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };
    Type type;
    int begin, end;
    double num = 0.0;
    std::string_view text;
};

const char* token_name(Token::Type t) {
    switch (t) {
        case Token::Type::number: return "number";
        case Token::Type::ident: return "identifier";
        case Token::Type::plus: return "'+'";
        case Token::Type::minus: return "'-'";
        case Token::Type::star: return "'*'";
        case Token::Type::slash: return "'/'";
        case Token::Type::caret: return "'^'";
        case Token::Type::lparen: return "'('";
        case Token::Type::rparen: return "')'";
        case Token::Type::end: return "end of input";
    }
    return "?";
}

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    int i = 0;
    const int n = static_cast<int>(src.size());
    auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
    auto is_ident_start = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    };
    auto is_ident = [&](char c) { return is_ident_start(c) || is_digit(c); };

    while (i < n) {
        const char c = src[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++i;
            continue;
        }
        const int begin = i;
        auto simple = [&](Token::Type t) {
            out.push_back({t, begin, begin + 1, 0.0, src.substr(begin, 1)});
            ++i;
        };
        switch (c) {
            case '+': simple(Token::Type::plus); continue;
            case '-': simple(Token::Type::minus); continue;
            case '*': simple(Token::Type::star); continue;
            case '/': simple(Token::Type::slash); continue;
            case '^': simple(Token::Type::caret); continue;
            case '(': simple(Token::Type::lparen); continue;
            case ')': simple(Token::Type::rparen); continue;
            default: break;
        }
        if (is_digit(c)) {
            while (i < n && is_digit(src[i])) ++i;
            if (i < n && src[i] == '.') {
                ++i;
                if (i >= n || !is_digit(src[i]))
                    throw ParseError("expected digits after decimal point", i);
                while (i < n && is_digit(src[i])) ++i;
            }
            if (i < n && (src[i] == 'e' || src[i] == 'E')) {
                int j = i + 1;
                if (j < n && (src[j] == '+' || src[j] == '-')) ++j;
                if (j >= n || !is_digit(src[j]))
                    throw ParseError("expected digits in exponent", j);
                i = j;
                while (i < n && is_digit(src[i])) ++i;
            }
            Token t{Token::Type::number, begin, i, 0.0, src.substr(begin, i - begin)};
            auto res = std::from_chars(src.data() + begin, src.data() + i, t.num);
            if (res.ec != std::errc() || res.ptr != src.data() + i)
                throw ParseError("malformed number literal '" + std::string(t.text) + "'", begin);
            out.push_back(t);
            continue;
        }
        if (is_ident_start(c)) {
            while (i < n && is_ident(src[i])) ++i;
            out.push_back({Token::Type::ident, begin, i, 0.0, src.substr(begin, i - begin)});
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", begin);
    }
    out.push_back({Token::Type::end, n, n, 0.0, {}});
    return out;
}

// ---------------------------------------------------------------------------
// recursive-descent parser
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' power)?        exponent must be a numeric literal
//   atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
// ---------------------------------------------------------------------------

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src), toks_(lex(src)) {}

    ExprPtr run() {
        ExprPtr e = expr();
        if (peek().type != Token::Type::end)
            fail("expected end of input or an operator");
        return e;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& take() { return toks_[pos_++]; }
    bool accept(Token::Type t) {
        if (peek().type != t) return false;
        ++pos_;
        return true;
    }

    /// Errors for an unexpected token point at the end of the last token we
    /// successfully consumed (the place where the expected thing is missing).
    [[noreturn]] void fail(const std::string& expected) const {
        const int off = pos_ > 0 ? toks_[pos_ - 1].end : 0;
        std::string got = token_name(peek().type);
        if (peek().type == Token::Type::ident || peek().type == Token::Type::number)
            got += " '" + std::string(peek().text) + "'";
        throw ParseError(expected + ", got " + got, off);
    }

    static ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

    ExprPtr expr() {
        ExprPtr e = term();
        while (true) {
            if (accept(Token::Type::plus)) {
                ExprPtr r = term();
                e = make({Expr::Kind::add, 0.0, {}, e, r, {e->span.begin, r->span.end}});
            } else if (accept(Token::Type::minus)) {
                ExprPtr r = term();
                e = make({Expr::Kind::sub, 0.0, {}, e, r, {e->span.begin, r->span.end}});
            } else {
                return e;
            }
        }
    }

    ExprPtr term() {
        ExprPtr e = factor();
        while (true) {
            if (accept(Token::Type::star)) {
                ExprPtr r = factor();
                e = make({Expr::Kind::mul, 0.0, {}, e, r, {e->span.begin, r->span.end}});
            } else if (accept(Token::Type::slash)) {
                ExprPtr r = factor();
                e = make({Expr::Kind::div, 0.0, {}, e, r, {e->span.begin, r->span.end}});
            } else {
                return e;
            }
        }
    }

    ExprPtr factor() {
        if (peek().type == Token::Type::minus) {
            const Token& m = take();
            ExprPtr inner = factor();
            return make({Expr::Kind::neg, 0.0, {}, inner, nullptr, {m.begin, inner->span.end}});
        }
        return power();
    }

    ExprPtr power() {
        ExprPtr base = atom();
        if (!accept(Token::Type::caret)) return base;
        ExprPtr exp = power();
        if (!exponent_is_literal(*exp))
            throw ParseError("exponent must be a numeric literal (parenthesize a negative one)",
                             exp->span.begin);
        return make({Expr::Kind::pow, 0.0, {}, base, exp, {base->span.begin, exp->span.end}});
    }

    static bool exponent_is_literal(const Expr& e) {
        if (e.kind == Expr::Kind::number) return true;
        if (e.kind == Expr::Kind::neg) return exponent_is_literal(*e.a);
        return false;
    }

    ExprPtr atom() {
        switch (peek().type) {
            case Token::Type::number: {
                const Token& t = take();
                return make({Expr::Kind::number, t.num, {}, nullptr, nullptr, {t.begin, t.end}});
            }
            case Token::Type::ident: {
                const Token& t = take();
                if (peek().type == Token::Type::lparen) {
                    take();
                    ExprPtr arg = expr();
                    if (!accept(Token::Type::rparen)) fail("expected ')' to close the call");
                    const int end = toks_[pos_ - 1].end;
                    return make({Expr::Kind::call, 0.0, std::string(t.text), arg, nullptr,
                                 {t.begin, end}});
                }
                return make({Expr::Kind::variable, 0.0, std::string(t.text), nullptr, nullptr,
                             {t.begin, t.end}});
            }
            case Token::Type::lparen: {
                take();
                ExprPtr e = expr();
                if (!accept(Token::Type::rparen)) fail("expected ')'");
                return e;
            }
            default:
                fail("expected a number, identifier, '(' or unary '-'");
        }
    }

    std::string_view src_;
    std::vector<Token> toks_;
    int pos_ = 0;
};

// ---------------------------------------------------------------------------
// canonical formatting
// ---------------------------------------------------------------------------

// Binding strength used to decide parenthesization. Atoms are 5, '^' is 4,
// unary minus 3, '*'/'/' 2, '+'/'-' 1.
int precedence(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::number: return e.number < 0.0 ? 3 : 5;
        case Expr::Kind::variable:
        case Expr::Kind::call: return 5;
        case Expr::Kind::pow: return 4;
        case Expr::Kind::neg: return 3;
        case Expr::Kind::mul:
        case Expr::Kind::div: return 2;
        case Expr::Kind::add:
        case Expr::Kind::sub: return 1;
    }
    return 5;
}

std::string format_number(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void fmt(const Expr& e, int min_prec, std::string& out) {
    const bool parens = precedence(e) < min_prec;
    if (parens) out += '(';
    switch (e.kind) {
        case Expr::Kind::number:
            out += format_number(e.number);
            break;
        case Expr::Kind::variable:
            out += e.name;
            break;
        case Expr::Kind::call:
            out += e.name;
            out += '(';
            fmt(*e.a, 0, out);
            out += ')';
            break;
        case Expr::Kind::neg:
            out += '-';
            fmt(*e.a, 4, out);
            break;
        case Expr::Kind::add:
            fmt(*e.a, 1, out);
            out += " + ";
            fmt(*e.b, 2, out);
            break;
        case Expr::Kind::sub:
            fmt(*e.a, 1, out);
            out += " - ";
            fmt(*e.b, 2, out);
            break;
        case Expr::Kind::mul:
            fmt(*e.a, 2, out);
            out += '*';
            fmt(*e.b, 3, out);
            break;
        case Expr::Kind::div:
            fmt(*e.a, 2, out);
            out += '/';
            fmt(*e.b, 3, out);
            break;
        case Expr::Kind::pow:
            fmt(*e.a, 5, out);
            out += '^';
            fmt(*e.b, 5, out);
            break;
    }
    if (parens) out += ')';
}

} // namespace

ExprPtr parse_expression(std::string_view text) { return Parser(text).run(); }

std::string format_expression(const Expr& e) {
    std::string out;
    fmt(e, 0, out);
    return out;
}

} // namespace riggeo
