#include "kmu/expr.hpp"

#include "kmu/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <vector>

namespace kmu::expr {

namespace {

NodePtr make(auto&& payload) {
    return std::make_shared<const Node>(Node{std::forward<decltype(payload)>(payload)});
}

class Parser {
public:
    Parser(std::string_view src, int coords) : src_(src), coords_(coords) {}

    NodePtr run() {
        skip_ws();
        if (at_end()) fail("empty expression");
        NodePtr n = parse_sum();
        skip_ws();
        if (!at_end()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return n;
    }

private:
    std::string_view src_;
    int coords_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::SyntaxError, what + " at byte " + std::to_string(pos_));
    }

    bool at_end() const { return pos_ >= src_.size(); }

    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (!at_end() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_signed();
        for (;;) {
            if (accept('+')) {
                lhs = make(Binary{BinaryOp::Add, lhs, parse_signed()});
            } else if (accept('-')) {
                lhs = make(Binary{BinaryOp::Sub, lhs, parse_signed()});
            } else {
                return lhs;
            }
        }
    }

    // A leading minus negates the whole product that follows it.
    NodePtr parse_signed() {
        if (accept('-')) return make(Negate{parse_signed()});
        return parse_product();
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_factor();
        for (;;) {
            if (accept('*')) {
                lhs = make(Binary{BinaryOp::Mul, lhs, parse_factor()});
            } else if (accept('/')) {
                lhs = make(Binary{BinaryOp::Div, lhs, parse_factor()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_factor() {
        if (accept('-')) return make(Negate{parse_factor()});
        NodePtr base = parse_primary();
        if (accept('^')) return make(Power{base, parse_exponent()});
        return base;
    }

    int parse_exponent() {
        if (accept('(')) {
            int k = parse_exponent();
            expect(')');
            return k;
        }
        bool neg = accept('-');
        skip_ws();
        std::size_t start = pos_;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (start == pos_) fail("exponent must be an integer literal");
        if (!at_end() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E')) {
            fail("exponent must be an integer literal");
        }
        int k = 0;
        auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, k);
        if (ec != std::errc{}) {
            pos_ = start;
            fail("exponent out of range");
        }
        return neg ? -k : k;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (at_end()) fail("unexpected end of input");
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr n = parse_sum();
            expect(')');
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        fail(std::string("unexpected '") + c + "'");
    }

    NodePtr parse_number() {
        std::size_t start = pos_;
        while (!at_end() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
        if (!at_end() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (!at_end() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (at_end() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                pos_ = save;
            } else {
                while (!at_end() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (ec != std::errc{} || ptr != src_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        return make(Number{v});
    }

    NodePtr parse_identifier() {
        std::size_t start = pos_;
        while (!at_end() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::string_view id = src_.substr(start, pos_ - start);

        if (id.size() >= 2 && id[0] == 'x' &&
            id.find_first_not_of("0123456789", 1) == std::string_view::npos) {
            int k = 0;
            auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), k);
            if (ec != std::errc{} || k < 1 || k > coords_) {
                throw Error(ErrorCode::VariableIndexOutOfRange,
                            std::string(id) + " at byte " + std::to_string(start) +
                                " (declared coordinates: " + std::to_string(coords_) + ")");
            }
            return make(Variable{k});
        }

        Function fn;
        if (id == "sin") {
            fn = Function::Sin;
        } else if (id == "cos") {
            fn = Function::Cos;
        } else if (id == "sqrt") {
            fn = Function::Sqrt;
        } else if (id == "exp") {
            fn = Function::Exp;
        } else {
            throw Error(ErrorCode::UnknownIdentifier,
                        "'" + std::string(id) + "' at byte " + std::to_string(start));
        }
        expect('(');
        NodePtr arg = parse_sum();
        expect(')');
        return make(Call{fn, arg});
    }
};

const char* function_name(Function fn) {
    switch (fn) {
        case Function::Sin: return "sin";
        case Function::Cos: return "cos";
        case Function::Sqrt: return "sqrt";
        case Function::Exp: return "exp";
    }
    return "?";
}

char op_char(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return '+';
        case BinaryOp::Sub: return '-';
        case BinaryOp::Mul: return '*';
        case BinaryOp::Div: return '/';
    }
    return '?';
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

[[noreturn]] void domain_error(const Node& n, const std::string& what) {
    throw Error(ErrorCode::DomainError, what + " in " + to_string(n));
}

Jet2 jet(const Node& n, std::span<const double> p) {
    const int m = static_cast<int>(p.size());
    return std::visit(
        overloaded{
            [&](const Number& v) { return Jet2(m, v.value); },
            [&](const Variable& v) { return Jet2::variable(m, v.index - 1, p[v.index - 1]); },
            [&](const Negate& v) { return -jet(*v.operand, p); },
            [&](const Binary& v) {
                Jet2 a = jet(*v.lhs, p);
                Jet2 b = jet(*v.rhs, p);
                switch (v.op) {
                    case BinaryOp::Add: return a + b;
                    case BinaryOp::Sub: return a - b;
                    case BinaryOp::Mul: return a * b;
                    case BinaryOp::Div: {
                        if (b.value == 0.0) domain_error(n, "division by zero");
                        double r = 1.0 / b.value;
                        return a * chain(b, r, -r * r, 2.0 * r * r * r);
                    }
                }
                return Jet2(m);
            },
            [&](const Power& v) {
                Jet2 a = jet(*v.base, p);
                const int k = v.exponent;
                if (k == 0) return Jet2(m, 1.0);
                if (k < 0 && a.value == 0.0) domain_error(n, "negative power of zero");
                double x = a.value;
                double d1 = k * std::pow(x, k - 1);
                double d2 = k == 1 ? 0.0 : static_cast<double>(k) * (k - 1) * std::pow(x, k - 2);
                return chain(a, std::pow(x, k), d1, d2);
            },
            [&](const Call& v) {
                Jet2 a = jet(*v.arg, p);
                double x = a.value;
                switch (v.fn) {
                    case Function::Sin: return chain(a, std::sin(x), std::cos(x), -std::sin(x));
                    case Function::Cos: return chain(a, std::cos(x), -std::sin(x), -std::cos(x));
                    case Function::Exp: {
                        double e = std::exp(x);
                        return chain(a, e, e, e);
                    }
                    case Function::Sqrt: {
                        if (x < 0.0) domain_error(n, "sqrt of negative value");
                        if (x == 0.0) domain_error(n, "sqrt not differentiable at zero");
                        double s = std::sqrt(x);
                        return chain(a, s, 0.5 / s, -0.25 / (s * x));
                    }
                }
                return Jet2(m);
            },
        },
        n.data);
}

double value(const Node& n, std::span<const double> p) {
    return std::visit(
        overloaded{
            [&](const Number& v) { return v.value; },
            [&](const Variable& v) { return p[v.index - 1]; },
            [&](const Negate& v) { return -value(*v.operand, p); },
            [&](const Binary& v) {
                double a = value(*v.lhs, p);
                double b = value(*v.rhs, p);
                switch (v.op) {
                    case BinaryOp::Add: return a + b;
                    case BinaryOp::Sub: return a - b;
                    case BinaryOp::Mul: return a * b;
                    case BinaryOp::Div:
                        if (b == 0.0) domain_error(n, "division by zero");
                        return a / b;
                }
                return 0.0;
            },
            [&](const Power& v) {
                double a = value(*v.base, p);
                if (v.exponent < 0 && a == 0.0) domain_error(n, "negative power of zero");
                return std::pow(a, v.exponent);
            },
            [&](const Call& v) {
                double a = value(*v.arg, p);
                switch (v.fn) {
                    case Function::Sin: return std::sin(a);
                    case Function::Cos: return std::cos(a);
                    case Function::Exp: return std::exp(a);
                    case Function::Sqrt:
                        if (a < 0.0) domain_error(n, "sqrt of negative value");
                        return std::sqrt(a);
                }
                return 0.0;
            },
        },
        n.data);
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check_point(const Expression& e, std::span<const double> point) {
    if (e.empty()) throw Error(ErrorCode::SyntaxError, "empty expression");
    if (static_cast<int>(point.size()) != e.coords()) {
        throw Error(ErrorCode::VariableIndexOutOfRange,
                    "point has " + std::to_string(point.size()) + " coordinates, expression expects " +
                        std::to_string(e.coords()));
    }
}

}  // namespace

Expression Expression::constant(double value, int coords) { return {make(Number{value}), coords}; }

Expression Expression::variable(int index, int coords) { return {make(Variable{index}), coords}; }

Expression operator+(const Expression& a, const Expression& b) {
    return {make(Binary{BinaryOp::Add, a.root_ptr(), b.root_ptr()}), a.coords()};
}

Expression operator*(double s, const Expression& e) {
    return {make(Binary{BinaryOp::Mul, make(Number{s}), e.root_ptr()}), e.coords()};
}

Jet2 Jet2::variable(int m, int index0, double v) {
    Jet2 j(m, v);
    j.gradient[index0] = 1.0;
    return j;
}

Jet2& Jet2::operator+=(const Jet2& o) {
    value += o.value;
    gradient += o.gradient;
    hessian += o.hessian;
    return *this;
}

Jet2& Jet2::operator-=(const Jet2& o) {
    value -= o.value;
    gradient -= o.gradient;
    hessian -= o.hessian;
    return *this;
}

Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }

Jet2 operator-(Jet2 a) {
    a.value = -a.value;
    a.gradient = -a.gradient;
    a.hessian = -a.hessian;
    return a;
}

Jet2 operator*(const Jet2& a, const Jet2& b) {
    Jet2 r;
    r.value = a.value * b.value;
    r.gradient = a.value * b.gradient + b.value * a.gradient;
    Eigen::MatrixXd cross = a.gradient * b.gradient.transpose();
    r.hessian = a.value * b.hessian + b.value * a.hessian + cross + cross.transpose();
    return r;
}

Jet2 operator*(double s, Jet2 a) {
    a.value *= s;
    a.gradient *= s;
    a.hessian *= s;
    return a;
}

Jet2 chain(const Jet2& a, double f, double df, double d2f) {
    Jet2 r;
    r.value = f;
    r.gradient = df * a.gradient;
    r.hessian = df * a.hessian + d2f * (a.gradient * a.gradient.transpose());
    return r;
}

Expression parse(std::string_view source, int coords) {
    return {Parser(source, coords).run(), coords};
}

std::string to_string(const Node& n) {
    return std::visit(
        overloaded{
            [](const Number& v) { return format_number(v.value); },
            [](const Variable& v) { return "x" + std::to_string(v.index); },
            [](const Negate& v) { return "(-" + to_string(*v.operand) + ")"; },
            [](const Binary& v) {
                return "(" + to_string(*v.lhs) + " " + op_char(v.op) + " " + to_string(*v.rhs) + ")";
            },
            [](const Power& v) {
                return "(" + to_string(*v.base) + "^" + std::to_string(v.exponent) + ")";
            },
            [](const Call& v) {
                return std::string(function_name(v.fn)) + "(" + to_string(*v.arg) + ")";
            },
        },
        n.data);
}

std::string to_string(const Expression& e) { return e.empty() ? std::string() : to_string(e.root()); }

bool structurally_equal(const Node& a, const Node& b) {
    if (a.data.index() != b.data.index()) return false;
    return std::visit(
        overloaded{
            [&](const Number& v) { return v.value == std::get<Number>(b.data).value; },
            [&](const Variable& v) { return v.index == std::get<Variable>(b.data).index; },
            [&](const Negate& v) { return structurally_equal(*v.operand, *std::get<Negate>(b.data).operand); },
            [&](const Binary& v) {
                const auto& o = std::get<Binary>(b.data);
                return v.op == o.op && structurally_equal(*v.lhs, *o.lhs) && structurally_equal(*v.rhs, *o.rhs);
            },
            [&](const Power& v) {
                const auto& o = std::get<Power>(b.data);
                return v.exponent == o.exponent && structurally_equal(*v.base, *o.base);
            },
            [&](const Call& v) {
                const auto& o = std::get<Call>(b.data);
                return v.fn == o.fn && structurally_equal(*v.arg, *o.arg);
            },
        },
        a.data);
}

double evaluate(const Expression& e, std::span<const double> point) {
    check_point(e, point);
    return value(e.root(), point);
}

Jet2 eval_jet2(const Expression& e, std::span<const double> point) {
    check_point(e, point);
    return jet(e.root(), point);
}

}  // namespace kmu::expr
