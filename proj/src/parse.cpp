#include <cctype>
#include <cstdlib>
#include <string>

#include "intersep/fields.hpp"

namespace intersep::fields {

namespace {

// Recursive-descent parser for the field grammar:
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' '-'? integer)?
//   atom   := number | 'x1' | 'x2' | name '(' expr ')' | '(' expr ')'
//
// Numbers are decimal literals with optional fraction and exponent.
class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    ScalarExpr run() {
        ScalarExpr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    const std::string& text_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("expression error at position " + std::to_string(pos_) +
                         ": " + msg + " in \"" + text_ + "\"");
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    ScalarExpr parse_expr() {
        ScalarExpr e = parse_term();
        for (;;) {
            if (consume('+')) e = e + parse_term();
            else if (consume('-')) e = e - parse_term();
            else return e;
        }
    }

    ScalarExpr parse_term() {
        ScalarExpr e = parse_factor();
        for (;;) {
            if (consume('*')) e = e * parse_factor();
            else if (consume('/')) e = e / parse_factor();
            else return e;
        }
    }

    ScalarExpr parse_factor() {
        if (consume('-')) return -parse_factor();
        return parse_power();
    }

    ScalarExpr parse_power() {
        ScalarExpr base = parse_atom();
        if (!consume('^')) return base;
        bool neg = consume('-');
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start) fail("expected integer exponent after '^'");
        int exponent = std::atoi(text_.substr(start, pos_ - start).c_str());
        return pow_i(base, neg ? -exponent : exponent);
    }

    ScalarExpr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
        if (consume('(')) {
            ScalarExpr e = parse_expr();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    ScalarExpr parse_number() {
        size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            size_t mark = pos_++;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            } else {
                pos_ = mark;  // bare 'e' belongs to the next token, not this number
            }
        }
        if (pos_ == start || text_.compare(start, pos_ - start, ".") == 0)
            fail("malformed number");
        return ScalarExpr(std::strtod(text_.substr(start, pos_ - start).c_str(), nullptr));
    }

    ScalarExpr parse_name() {
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name = text_.substr(start, pos_ - start);
        if (name == "x1") return var_x1();
        if (name == "x2") return var_x2();
        if (name == "sin" || name == "cos" || name == "exp") {
            if (!consume('(')) fail("expected '(' after " + name);
            ScalarExpr arg = parse_expr();
            if (!consume(')')) fail("expected ')' closing " + name);
            if (name == "sin") return sin(arg);
            if (name == "cos") return cos(arg);
            return exp(arg);
        }
        fail("unknown identifier '" + name + "'");
    }
};

}  // namespace

ScalarExpr parse_expression(const std::string& text) { return Parser(text).run(); }

}  // namespace intersep::fields
