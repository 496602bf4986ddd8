#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace intersep::fields {

struct Vec2 {
    double x1 = 0.0;
    double x2 = 0.0;

    double norm() const { return std::hypot(x1, x2); }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x1, s * v.x2}; }
inline double dot(Vec2 a, Vec2 b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double cross(Vec2 a, Vec2 b) { return a.x1 * b.x2 - a.x2 * b.x1; }

/// Axis-aligned analysis rectangle, nondimensional coordinates.
struct Window {
    double xmin = -1.0, xmax = 1.0;
    double ymin = -1.0, ymax = 1.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    bool valid() const { return width() > 0.0 && height() > 0.0; }
    bool contains(Vec2 p, double pad = 0.0) const {
        return p.x1 >= xmin - pad && p.x1 <= xmax + pad &&
               p.x2 >= ymin - pad && p.x2 <= ymax + pad;
    }
};

/// 2x2 real matrix, row major.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;

    double det() const { return a11 * a22 - a12 * a21; }
    double trace() const { return a11 + a22; }
    double frobenius() const {
        return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22);
    }
    Vec2 apply(Vec2 v) const {
        return {a11 * v.x1 + a12 * v.x2, a21 * v.x1 + a22 * v.x2};
    }
};

enum class Axis { X1, X2 };

/// Thrown when evaluation hits a division by zero (or 0 raised to a
/// negative power). Carries the offending subexpression in the message.
class EvalError : public std::runtime_error {
public:
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
struct Node;
}

/// Immutable closed-form scalar field over (x1, x2).
///
/// Node kinds: constant, variable, sum, difference, product, quotient,
/// integer power, sin, cos, exp. The set is closed under partial
/// differentiation, so every derived field stays exactly representable.
/// Trees are never mutated after construction; sharing subtrees across
/// threads is safe.
class ScalarExpr {
public:
    ScalarExpr();                 // the constant 0
    ScalarExpr(double constant);  // NOLINT: implicit by design
    static ScalarExpr variable(Axis axis);

    /// Exact arithmetic evaluation. Throws EvalError on division by zero.
    double eval(Vec2 p) const;

    /// Symbolic partial derivative with respect to one axis.
    ScalarExpr partial(Axis axis) const;

    /// True when the tree is a literal constant (after construction-time
    /// folding); writes the value if out is given.
    bool is_constant(double* out = nullptr) const;

    /// Infix form in the config grammar; parse(str()) is
    /// evaluation-equivalent to the original.
    std::string str() const;

    friend ScalarExpr operator+(const ScalarExpr&, const ScalarExpr&);
    friend ScalarExpr operator-(const ScalarExpr&, const ScalarExpr&);
    friend ScalarExpr operator*(const ScalarExpr&, const ScalarExpr&);
    friend ScalarExpr operator/(const ScalarExpr&, const ScalarExpr&);
    friend ScalarExpr operator-(const ScalarExpr&);
    friend ScalarExpr pow_i(const ScalarExpr&, int exponent);
    friend ScalarExpr sin(const ScalarExpr&);
    friend ScalarExpr cos(const ScalarExpr&);
    friend ScalarExpr exp(const ScalarExpr&);
    friend ScalarExpr scale_coordinates(const ScalarExpr&, double factor);

private:
    explicit ScalarExpr(std::shared_ptr<const detail::Node> node);
    std::shared_ptr<const detail::Node> node_;
};

// Namespace-scope declarations of the named friends, so qualified lookup
// (fields::pow_i) works in addition to argument-dependent lookup.
ScalarExpr pow_i(const ScalarExpr&, int exponent);
ScalarExpr sin(const ScalarExpr&);
ScalarExpr cos(const ScalarExpr&);
ScalarExpr exp(const ScalarExpr&);
ScalarExpr scale_coordinates(const ScalarExpr&, double factor);

ScalarExpr var_x1();
ScalarExpr var_x2();

/// Parses the plain-text expression grammar: infix over `x1`, `x2` with
/// + - * / , `^` for integer powers, and sin( ), cos( ), exp( ).
ScalarExpr parse_expression(const std::string& text);

/// Two-component closed-form vector field.
struct VectorField {
    ScalarExpr c1;
    ScalarExpr c2;

    Vec2 eval(Vec2 p) const { return {c1.eval(p), c2.eval(p)}; }
};

/// Closed-form Jacobian of a vector field; entry (i,j) = d w_i / d x_j.
struct JacobianExpr {
    ScalarExpr d11, d12, d21, d22;

    Mat2 eval(Vec2 p) const {
        return {d11.eval(p), d12.eval(p), d21.eval(p), d22.eval(p)};
    }
};

VectorField grad(const ScalarExpr& e);
ScalarExpr divergence(const VectorField& w);
ScalarExpr laplacian(const ScalarExpr& e);
/// (a . grad) b, componentwise.
VectorField advect(const VectorField& a, const VectorField& b);
/// (a . grad) f for a scalar f.
ScalarExpr advect_scalar(const VectorField& a, const ScalarExpr& f);
JacobianExpr jacobian(const VectorField& w);
Mat2 jacobian_at(const VectorField& w, Vec2 p);

/// Returns e with x replaced by factor*x, i.e. the map x -> e(factor*x).
/// Used by the nondimensional/dimensional coordinate changes.
ScalarExpr scale_coordinates(const ScalarExpr& e, double factor);
inline VectorField scale_coordinates(const VectorField& w, double factor) {
    return {scale_coordinates(w.c1, factor), scale_coordinates(w.c2, factor)};
}

}  // namespace intersep::fields
