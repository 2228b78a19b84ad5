#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ergopt/errors.hpp"

namespace ergopt {

// One-variable closed-form expression over x in [0,1].
//
// Grammar: numbers, x, pi, e, + - * / ^ with ^ right-associative and binding
// tighter than unary minus, parentheses, and exp/log/sin/cos/sqrt.
// Evaluation faults (log(<=0), sqrt(<0), x/0, invalid pow) throw DomainError
// instead of producing NaN.
class Expression {
public:
    static Expression parse(std::string_view src);

    double operator()(double x) const;

    const std::string& source() const { return src_; }

private:
    enum class Op : unsigned char {
        number, var, add, sub, mul, div, pow, neg,
        fn_exp, fn_log, fn_sin, fn_cos, fn_sqrt,
    };
    struct Node {
        Op op;
        double value = 0.0;  // for number
        int a = -1, b = -1;  // child indices
        std::size_t offset = 0;
    };

    double eval(int node, double x) const;

    std::string src_;
    std::vector<Node> nodes_;
    int root_ = -1;

    friend class ExpressionParser;
};

} // namespace ergopt
