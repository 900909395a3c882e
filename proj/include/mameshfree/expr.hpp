#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <utility>

#include "mameshfree/fields.hpp"

namespace mameshfree {

/// Syntax error in a field expression; offset is the byte position in the
/// source text (end-of-text for truncated input).
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

  private:
    std::size_t offset_;
};

namespace detail {

/// Recursive descent over: expr := term (('+'|'-') term)*,
/// term := unary (('*'|'/') unary)*, unary := ('+'|'-')* power,
/// power := atom ('^' unary)?, atom := number | x | y | fn '(' expr ')' |
/// '(' expr ')'. Functions: exp, sin, cos, sqrt.
class ExprParser {
  public:
    explicit ExprParser(const std::string& text) : text_(text) {}

    ScalarField parse() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
        ScalarField f = expr();
        skip_ws();
        if (pos_ < text_.size()) throw ParseError("unexpected trailing input", pos_);
        return f;
    }

  private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    ScalarField expr() {
        ScalarField lhs = term();
        while (true) {
            if (eat('+')) {
                ScalarField rhs = term();
                lhs = [l = std::move(lhs), r = std::move(rhs)](double x, double y) {
                    return l(x, y) + r(x, y);
                };
            } else if (eat('-')) {
                ScalarField rhs = term();
                lhs = [l = std::move(lhs), r = std::move(rhs)](double x, double y) {
                    return l(x, y) - r(x, y);
                };
            } else {
                return lhs;
            }
        }
    }

    ScalarField term() {
        ScalarField lhs = unary();
        while (true) {
            if (eat('*')) {
                ScalarField rhs = unary();
                lhs = [l = std::move(lhs), r = std::move(rhs)](double x, double y) {
                    return l(x, y) * r(x, y);
                };
            } else if (eat('/')) {
                ScalarField rhs = unary();
                lhs = [l = std::move(lhs), r = std::move(rhs)](double x, double y) {
                    return l(x, y) / r(x, y);
                };
            } else {
                return lhs;
            }
        }
    }

    ScalarField unary() {
        if (eat('-')) {
            ScalarField f = unary();
            return [f = std::move(f)](double x, double y) { return -f(x, y); };
        }
        if (eat('+')) return unary();
        return power();
    }

    ScalarField power() {
        ScalarField base = atom();
        if (eat('^')) {
            ScalarField expo = unary();
            return [b = std::move(base), e = std::move(expo)](double x, double y) {
                return std::pow(b(x, y), e(x, y));
            };
        }
        return base;
    }

    ScalarField atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            ScalarField inner = expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    ScalarField number() {
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) throw ParseError("invalid number", pos_);
        pos_ += static_cast<std::size_t>(end - begin);
        return [v](double, double) { return v; };
    }

    ScalarField identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::string name = text_.substr(start, pos_ - start);
        if (name == "x") return [](double x, double) { return x; };
        if (name == "y") return [](double, double y) { return y; };
        double (*fn)(double) = nullptr;
        if (name == "exp")
            fn = std::exp;
        else if (name == "sin")
            fn = std::sin;
        else if (name == "cos")
            fn = std::cos;
        else if (name == "sqrt")
            fn = std::sqrt;
        else
            throw ParseError("unknown identifier '" + name + "'", start);
        if (!eat('(')) throw ParseError("expected '(' after '" + name + "'", pos_);
        ScalarField arg = expr();
        if (!eat(')')) throw ParseError("expected ')'", pos_);
        return [fn, a = std::move(arg)](double x, double y) { return fn(a(x, y)); };
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Compile an arithmetic expression in x and y to a scalar field.
inline ScalarField parse_field_expr(const std::string& text) {
    return detail::ExprParser(text).parse();
}

}  // namespace mameshfree
