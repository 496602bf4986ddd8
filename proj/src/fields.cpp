#include "intersep/fields.hpp"

#include <cstdio>
#include <utility>

namespace intersep::fields {

namespace detail {

enum class Kind { Constant, Variable, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp };

struct Node {
    Kind kind;
    double value = 0.0;   // Constant
    Axis axis = Axis::X1; // Variable
    int exponent = 0;     // Pow
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

}  // namespace detail

namespace {

using detail::Kind;
using detail::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_constant(double value) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Constant;
    n->value = value;
    return n;
}

NodePtr make_variable(Axis axis) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Variable;
    n->axis = axis;
    return n;
}

NodePtr make_node(Kind kind, NodePtr a, NodePtr b = nullptr, int exponent = 0) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->a = std::move(a);
    n->b = std::move(b);
    n->exponent = exponent;
    return n;
}

bool constant_of(const NodePtr& n, double* out) {
    if (n->kind != Kind::Constant) return false;
    if (out) *out = n->value;
    return true;
}

bool is_const_value(const NodePtr& n, double v) {
    double c;
    return constant_of(n, &c) && c == v;
}

double ipow(double base, int n) {
    // Exact repeated multiplication; callers handle base == 0 with n < 0.
    bool inv = n < 0;
    unsigned long long k = inv ? -static_cast<long long>(n) : n;
    double r = 1.0, p = base;
    while (k) {
        if (k & 1ULL) r *= p;
        p *= p;
        k >>= 1ULL;
    }
    return inv ? 1.0 / r : r;
}

// Construction-time folding: constants combine, additive/multiplicative
// identities drop out. Quotients with a literal zero denominator are kept
// so the error surfaces at evaluation, not silently at build time.
NodePtr fold_add(const NodePtr& a, const NodePtr& b) {
    double ca, cb;
    if (constant_of(a, &ca) && constant_of(b, &cb)) return make_constant(ca + cb);
    if (is_const_value(a, 0.0)) return b;
    if (is_const_value(b, 0.0)) return a;
    return make_node(Kind::Add, a, b);
}

NodePtr fold_sub(const NodePtr& a, const NodePtr& b) {
    double ca, cb;
    if (constant_of(a, &ca) && constant_of(b, &cb)) return make_constant(ca - cb);
    if (is_const_value(b, 0.0)) return a;
    return make_node(Kind::Sub, a, b);
}

NodePtr fold_mul(const NodePtr& a, const NodePtr& b) {
    double ca, cb;
    if (constant_of(a, &ca) && constant_of(b, &cb)) return make_constant(ca * cb);
    if (is_const_value(a, 0.0) || is_const_value(b, 0.0)) return make_constant(0.0);
    if (is_const_value(a, 1.0)) return b;
    if (is_const_value(b, 1.0)) return a;
    return make_node(Kind::Mul, a, b);
}

NodePtr fold_div(const NodePtr& a, const NodePtr& b) {
    double ca, cb;
    if (constant_of(b, &cb) && cb != 0.0) {
        if (constant_of(a, &ca)) return make_constant(ca / cb);
        if (cb == 1.0) return a;
    }
    return make_node(Kind::Div, a, b);
}

NodePtr fold_pow(const NodePtr& a, int n) {
    if (n == 0) return make_constant(1.0);
    if (n == 1) return a;
    double ca;
    if (constant_of(a, &ca) && !(ca == 0.0 && n < 0)) return make_constant(ipow(ca, n));
    return make_node(Kind::Pow, a, nullptr, n);
}

NodePtr fold_unary(Kind kind, const NodePtr& a) {
    double ca;
    if (constant_of(a, &ca)) {
        switch (kind) {
            case Kind::Sin: return make_constant(std::sin(ca));
            case Kind::Cos: return make_constant(std::cos(ca));
            case Kind::Exp: return make_constant(std::exp(ca));
            default: break;
        }
    }
    return make_node(kind, a);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Operator precedence for printing: additive 1, multiplicative 2, power 3,
// atoms 4. Negative literals print at additive precedence so they pick up
// parentheses wherever a bare '-' would be ambiguous.
int precedence(const NodePtr& n) {
    switch (n->kind) {
        case Kind::Add:
        case Kind::Sub: return 1;
        case Kind::Mul:
        case Kind::Div: return 2;
        case Kind::Pow: return 3;
        case Kind::Constant: return n->value < 0.0 ? 1 : 4;
        default: return 4;
    }
}

void print_node(const NodePtr& n, std::string& out, int parent_prec, bool right_operand) {
    int prec = precedence(n);
    bool parens = prec < parent_prec || (prec == parent_prec && right_operand);
    if (parens) out += '(';
    switch (n->kind) {
        case Kind::Constant:
            out += format_double(n->value);
            break;
        case Kind::Variable:
            out += n->axis == Axis::X1 ? "x1" : "x2";
            break;
        case Kind::Add:
            print_node(n->a, out, 1, false);
            out += " + ";
            print_node(n->b, out, 1, true);
            break;
        case Kind::Sub:
            print_node(n->a, out, 1, false);
            out += " - ";
            print_node(n->b, out, 2, true);
            break;
        case Kind::Mul:
            print_node(n->a, out, 2, false);
            out += "*";
            print_node(n->b, out, 2, true);
            break;
        case Kind::Div:
            print_node(n->a, out, 2, false);
            out += "/";
            print_node(n->b, out, 3, true);
            break;
        case Kind::Pow:
            print_node(n->a, out, 4, false);
            out += '^';
            out += std::to_string(n->exponent);
            break;
        case Kind::Sin:
        case Kind::Cos:
        case Kind::Exp:
            out += n->kind == Kind::Sin ? "sin" : n->kind == Kind::Cos ? "cos" : "exp";
            out += '(';
            print_node(n->a, out, 0, false);
            out += ')';
            break;
    }
    if (parens) out += ')';
}

std::string node_to_string(const NodePtr& n) {
    std::string out;
    print_node(n, out, 0, false);
    return out;
}

double eval_node(const NodePtr& n, Vec2 p) {
    switch (n->kind) {
        case Kind::Constant: return n->value;
        case Kind::Variable: return n->axis == Axis::X1 ? p.x1 : p.x2;
        case Kind::Add: return eval_node(n->a, p) + eval_node(n->b, p);
        case Kind::Sub: return eval_node(n->a, p) - eval_node(n->b, p);
        case Kind::Mul: return eval_node(n->a, p) * eval_node(n->b, p);
        case Kind::Div: {
            double den = eval_node(n->b, p);
            if (den == 0.0)
                throw EvalError("division by zero in \"" + node_to_string(n) + "\"");
            return eval_node(n->a, p) / den;
        }
        case Kind::Pow: {
            double base = eval_node(n->a, p);
            if (base == 0.0 && n->exponent < 0)
                throw EvalError("zero raised to a negative power in \"" +
                                node_to_string(n) + "\"");
            return ipow(base, n->exponent);
        }
        case Kind::Sin: return std::sin(eval_node(n->a, p));
        case Kind::Cos: return std::cos(eval_node(n->a, p));
        case Kind::Exp: return std::exp(eval_node(n->a, p));
    }
    throw std::logic_error("unreachable expression node kind");
}

NodePtr diff_node(const NodePtr& n, Axis axis) {
    switch (n->kind) {
        case Kind::Constant: return make_constant(0.0);
        case Kind::Variable: return make_constant(n->axis == axis ? 1.0 : 0.0);
        case Kind::Add: return fold_add(diff_node(n->a, axis), diff_node(n->b, axis));
        case Kind::Sub: return fold_sub(diff_node(n->a, axis), diff_node(n->b, axis));
        case Kind::Mul:
            return fold_add(fold_mul(diff_node(n->a, axis), n->b),
                            fold_mul(n->a, diff_node(n->b, axis)));
        case Kind::Div:
            // (f/g)' = (f' g - f g') / g^2
            return fold_div(fold_sub(fold_mul(diff_node(n->a, axis), n->b),
                                     fold_mul(n->a, diff_node(n->b, axis))),
                            fold_pow(n->b, 2));
        case Kind::Pow:
            // (f^k)' = k f^(k-1) f'
            return fold_mul(make_constant(static_cast<double>(n->exponent)),
                            fold_mul(fold_pow(n->a, n->exponent - 1),
                                     diff_node(n->a, axis)));
        case Kind::Sin:
            return fold_mul(fold_unary(Kind::Cos, n->a), diff_node(n->a, axis));
        case Kind::Cos:
            return fold_mul(make_constant(-1.0),
                            fold_mul(fold_unary(Kind::Sin, n->a), diff_node(n->a, axis)));
        case Kind::Exp:
            return fold_mul(fold_unary(Kind::Exp, n->a), diff_node(n->a, axis));
    }
    throw std::logic_error("unreachable expression node kind");
}

NodePtr rescale_node(const NodePtr& n, double factor) {
    switch (n->kind) {
        case Kind::Constant: return n;
        case Kind::Variable:
            return fold_mul(make_constant(factor), make_variable(n->axis));
        case Kind::Add: return fold_add(rescale_node(n->a, factor), rescale_node(n->b, factor));
        case Kind::Sub: return fold_sub(rescale_node(n->a, factor), rescale_node(n->b, factor));
        case Kind::Mul: return fold_mul(rescale_node(n->a, factor), rescale_node(n->b, factor));
        case Kind::Div: return fold_div(rescale_node(n->a, factor), rescale_node(n->b, factor));
        case Kind::Pow: return fold_pow(rescale_node(n->a, factor), n->exponent);
        case Kind::Sin:
        case Kind::Cos:
        case Kind::Exp: return fold_unary(n->kind, rescale_node(n->a, factor));
    }
    throw std::logic_error("unreachable expression node kind");
}

}  // namespace

ScalarExpr::ScalarExpr() : node_(make_constant(0.0)) {}
ScalarExpr::ScalarExpr(double constant) : node_(make_constant(constant)) {}
ScalarExpr::ScalarExpr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}

ScalarExpr ScalarExpr::variable(Axis axis) { return ScalarExpr(make_variable(axis)); }

double ScalarExpr::eval(Vec2 p) const { return eval_node(node_, p); }

ScalarExpr ScalarExpr::partial(Axis axis) const { return ScalarExpr(diff_node(node_, axis)); }

bool ScalarExpr::is_constant(double* out) const { return constant_of(node_, out); }

std::string ScalarExpr::str() const { return node_to_string(node_); }

ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
    return ScalarExpr(fold_add(a.node_, b.node_));
}
ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) {
    return ScalarExpr(fold_sub(a.node_, b.node_));
}
ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
    return ScalarExpr(fold_mul(a.node_, b.node_));
}
ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
    return ScalarExpr(fold_div(a.node_, b.node_));
}
ScalarExpr operator-(const ScalarExpr& a) {
    return ScalarExpr(fold_sub(make_constant(0.0), a.node_));
}
ScalarExpr pow_i(const ScalarExpr& a, int exponent) {
    return ScalarExpr(fold_pow(a.node_, exponent));
}
ScalarExpr sin(const ScalarExpr& a) { return ScalarExpr(fold_unary(Kind::Sin, a.node_)); }
ScalarExpr cos(const ScalarExpr& a) { return ScalarExpr(fold_unary(Kind::Cos, a.node_)); }
ScalarExpr exp(const ScalarExpr& a) { return ScalarExpr(fold_unary(Kind::Exp, a.node_)); }

ScalarExpr scale_coordinates(const ScalarExpr& e, double factor) {
    return ScalarExpr(rescale_node(e.node_, factor));
}

ScalarExpr var_x1() { return ScalarExpr::variable(Axis::X1); }
ScalarExpr var_x2() { return ScalarExpr::variable(Axis::X2); }

VectorField grad(const ScalarExpr& e) {
    return {e.partial(Axis::X1), e.partial(Axis::X2)};
}

ScalarExpr divergence(const VectorField& w) {
    return w.c1.partial(Axis::X1) + w.c2.partial(Axis::X2);
}

ScalarExpr laplacian(const ScalarExpr& e) {
    return e.partial(Axis::X1).partial(Axis::X1) + e.partial(Axis::X2).partial(Axis::X2);
}

VectorField advect(const VectorField& a, const VectorField& b) {
    return {advect_scalar(a, b.c1), advect_scalar(a, b.c2)};
}

ScalarExpr advect_scalar(const VectorField& a, const ScalarExpr& f) {
    return a.c1 * f.partial(Axis::X1) + a.c2 * f.partial(Axis::X2);
}

JacobianExpr jacobian(const VectorField& w) {
    return {w.c1.partial(Axis::X1), w.c1.partial(Axis::X2),
            w.c2.partial(Axis::X1), w.c2.partial(Axis::X2)};
}

Mat2 jacobian_at(const VectorField& w, Vec2 p) { return jacobian(w).eval(p); }

}  // namespace intersep::fields
