#include "ergopt/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace ergopt {

namespace {

struct Token {
    enum Kind { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };
    Kind kind;
    double value = 0.0;
    std::string text;
    std::size_t offset = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        tok_.offset = pos_;
        if (pos_ >= src_.size()) {
            tok_.kind = Token::end;
            return;
        }
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.data() + pos_;
            char* endp = nullptr;
            tok_.value = std::strtod(begin, &endp);
            if (endp == begin) throw ParseError("malformed number", pos_);
            pos_ += static_cast<std::size_t>(endp - begin);
            tok_.kind = Token::number;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            tok_.kind = Token::ident;
            tok_.text.assign(src_.substr(start, pos_ - start));
            return;
        }
        ++pos_;
        switch (c) {
            case '+': tok_.kind = Token::plus; return;
            case '-': tok_.kind = Token::minus; return;
            case '*': tok_.kind = Token::star; return;
            case '/': tok_.kind = Token::slash; return;
            case '^': tok_.kind = Token::caret; return;
            case '(': tok_.kind = Token::lparen; return;
            case ')': tok_.kind = Token::rparen; return;
        }
        throw ParseError(std::string("unexpected character '") + c + "', expected an expression token",
                         pos_ - 1);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token tok_;
};

} // namespace

class ExpressionParser {
public:
    explicit ExpressionParser(std::string_view src) : lex_(src) {}

    Expression run(std::string_view src) {
        Expression e;
        e.src_.assign(src);
        nodes_ = &e.nodes_;
        e.root_ = parse_sum();
        if (lex_.peek().kind != Token::end)
            throw ParseError("trailing input, expected end of expression or an operator",
                             lex_.peek().offset);
        return e;
    }

private:
    using Op = Expression::Op;

    int push(Op op, std::size_t offset, int a = -1, int b = -1, double value = 0.0) {
        nodes_->push_back({op, value, a, b, offset});
        return static_cast<int>(nodes_->size()) - 1;
    }

    int parse_sum() {
        int lhs = parse_product();
        for (;;) {
            Token::Kind k = lex_.peek().kind;
            if (k != Token::plus && k != Token::minus) return lhs;
            Token t = lex_.take();
            int rhs = parse_product();
            lhs = push(k == Token::plus ? Op::add : Op::sub, t.offset, lhs, rhs);
        }
    }

    int parse_product() {
        int lhs = parse_unary();
        for (;;) {
            Token::Kind k = lex_.peek().kind;
            if (k != Token::star && k != Token::slash) return lhs;
            Token t = lex_.take();
            int rhs = parse_unary();
            lhs = push(k == Token::star ? Op::mul : Op::div, t.offset, lhs, rhs);
        }
    }

    // '^' binds tighter than unary minus: -x^2 parses as -(x^2).
    int parse_unary() {
        if (lex_.peek().kind == Token::minus) {
            Token t = lex_.take();
            int a = parse_unary();
            return push(Op::neg, t.offset, a);
        }
        return parse_power();
    }

    int parse_power() {
        int base = parse_atom();
        if (lex_.peek().kind == Token::caret) {
            Token t = lex_.take();
            int expo = parse_unary();  // right associative, allows x^-2
            return push(Op::pow, t.offset, base, expo);
        }
        return base;
    }

    int parse_atom() {
        Token t = lex_.take();
        switch (t.kind) {
            case Token::number:
                return push(Op::number, t.offset, -1, -1, t.value);
            case Token::lparen: {
                int inner = parse_sum();
                if (lex_.peek().kind != Token::rparen)
                    throw ParseError("expected ')'", lex_.peek().offset);
                lex_.take();
                return inner;
            }
            case Token::ident: {
                if (t.text == "x") return push(Op::var, t.offset);
                if (t.text == "pi") return push(Op::number, t.offset, -1, -1, M_PI);
                if (t.text == "e") return push(Op::number, t.offset, -1, -1, M_E);
                Op fn;
                if (t.text == "exp") fn = Op::fn_exp;
                else if (t.text == "log") fn = Op::fn_log;
                else if (t.text == "sin") fn = Op::fn_sin;
                else if (t.text == "cos") fn = Op::fn_cos;
                else if (t.text == "sqrt") fn = Op::fn_sqrt;
                else
                    throw ParseError("unknown identifier '" + t.text +
                                         "', expected x, pi, e, exp, log, sin, cos or sqrt",
                                     t.offset);
                if (lex_.peek().kind != Token::lparen)
                    throw ParseError("expected '(' after function name", lex_.peek().offset);
                lex_.take();
                int arg = parse_sum();
                if (lex_.peek().kind != Token::rparen)
                    throw ParseError("expected ')'", lex_.peek().offset);
                lex_.take();
                return push(fn, t.offset, arg);
            }
            default:
                throw ParseError("expected a number, x, constant, function or '('", t.offset);
        }
    }

    Lexer lex_;
    std::vector<Expression::Node>* nodes_ = nullptr;
};

Expression Expression::parse(std::string_view src) {
    ExpressionParser p(src);
    return p.run(src);
}

double Expression::eval(int node, double x) const {
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    switch (n.op) {
        case Op::number: return n.value;
        case Op::var: return x;
        case Op::add: return eval(n.a, x) + eval(n.b, x);
        case Op::sub: return eval(n.a, x) - eval(n.b, x);
        case Op::mul: return eval(n.a, x) * eval(n.b, x);
        case Op::div: {
            double d = eval(n.b, x);
            if (d == 0.0) throw DomainError("division by zero", n.offset);
            return eval(n.a, x) / d;
        }
        case Op::pow: {
            double base = eval(n.a, x), expo = eval(n.b, x);
            if (base == 0.0 && expo < 0.0) throw DomainError("zero raised to a negative power", n.offset);
            if (base < 0.0 && expo != std::floor(expo))
                throw DomainError("negative base with non-integer exponent", n.offset);
            return std::pow(base, expo);
        }
        case Op::neg: return -eval(n.a, x);
        case Op::fn_exp: return std::exp(eval(n.a, x));
        case Op::fn_log: {
            double v = eval(n.a, x);
            if (v <= 0.0) throw DomainError("log of a non-positive value", n.offset);
            return std::log(v);
        }
        case Op::fn_sin: return std::sin(eval(n.a, x));
        case Op::fn_cos: return std::cos(eval(n.a, x));
        case Op::fn_sqrt: {
            double v = eval(n.a, x);
            if (v < 0.0) throw DomainError("sqrt of a negative value", n.offset);
            return std::sqrt(v);
        }
    }
    throw Error("corrupt expression node");
}

double Expression::operator()(double x) const {
    if (root_ < 0) throw Error("empty expression");
    return eval(root_, x);
}

} // namespace ergopt
