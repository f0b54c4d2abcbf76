#pragma once

// Closed-form scalar expressions in chart coordinates x1..xm, evaluated with
// exact value, gradient and Hessian (second-order truncated Taylor arithmetic).

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>

namespace kmu::expr {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

enum class BinaryOp { Add, Sub, Mul, Div };
enum class Function { Sin, Cos, Sqrt, Exp };

struct Number {
    double value;
};
struct Variable {
    int index;  // 1-based, x1..xm
};
struct Negate {
    NodePtr operand;
};
struct Binary {
    BinaryOp op;
    NodePtr lhs, rhs;
};
struct Power {
    NodePtr base;
    int exponent;
};
struct Call {
    Function fn;
    NodePtr arg;
};

struct Node {
    std::variant<Number, Variable, Negate, Binary, Power, Call> data;
};

/// Parsed expression over a fixed number of coordinates.
class Expression {
public:
    Expression() = default;
    Expression(NodePtr root, int coords) : root_(std::move(root)), coords_(coords) {}

    [[nodiscard]] const Node& root() const { return *root_; }
    [[nodiscard]] const NodePtr& root_ptr() const { return root_; }
    [[nodiscard]] int coords() const noexcept { return coords_; }
    [[nodiscard]] bool empty() const noexcept { return !root_; }

    static Expression constant(double value, int coords);
    static Expression variable(int index, int coords);

private:
    NodePtr root_;
    int coords_ = 0;
};

Expression operator+(const Expression& a, const Expression& b);
Expression operator*(double s, const Expression& e);

/// Value, gradient and Hessian of a scalar function at a point.
struct Jet2 {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;

    Jet2() = default;
    explicit Jet2(int m, double v = 0.0)
        : value(v), gradient(Eigen::VectorXd::Zero(m)), hessian(Eigen::MatrixXd::Zero(m, m)) {}

    static Jet2 variable(int m, int index0, double v);

    Jet2& operator+=(const Jet2& o);
    Jet2& operator-=(const Jet2& o);
};

Jet2 operator+(Jet2 a, const Jet2& b);
Jet2 operator-(Jet2 a, const Jet2& b);
Jet2 operator-(Jet2 a);
Jet2 operator*(const Jet2& a, const Jet2& b);
Jet2 operator*(double s, Jet2 a);

/// Applies a smooth scalar function given its first two derivatives at a.value.
Jet2 chain(const Jet2& a, double f, double df, double d2f);

/// Parses `source` over coordinates x1..x`coords`.
/// Grammar (loosest to tightest): + -, leading unary minus, * /, ^ integer,
/// primary (number, xk, sin/cos/sqrt/exp(...), parentheses).
/// Throws Error{SyntaxError|UnknownIdentifier|VariableIndexOutOfRange}.
Expression parse(std::string_view source, int coords);

/// Canonical text form; parse(to_string(e)) reproduces the same tree.
std::string to_string(const Expression& e);
std::string to_string(const Node& n);

bool structurally_equal(const Node& a, const Node& b);

double evaluate(const Expression& e, std::span<const double> point);
Jet2 eval_jet2(const Expression& e, std::span<const double> point);

}  // namespace kmu::expr
