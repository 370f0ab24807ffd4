#include "pwarp/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>

namespace pwarp {

using detail::BinaryOp;
using detail::Func;
using detail::Node;
using detail::NodePtr;

// ---------------------------------------------------------------------------
// ParamTable

void ParamTable::set(std::string_view name, double value) {
    if (!std::isfinite(value))
        throw Error(ErrorKind::Load, "parameter '" + std::string(name) + "' must be finite");
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) {
            values_[i] = value;
            return;
        }
    }
    names_.emplace_back(name);
    values_.push_back(value);
}

bool ParamTable::has(std::string_view name) const {
    return index_of(name).has_value();
}

double ParamTable::get(std::string_view name) const {
    auto idx = index_of(name);
    if (!idx)
        throw Error(ErrorKind::UnknownIdentifier, "unknown parameter '" + std::string(name) + "'");
    return values_[static_cast<std::size_t>(*idx)];
}

std::optional<int> ParamTable::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Node constructors

namespace {

NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Constant;
    n->value = v;
    return n;
}

NodePtr make_var(int index, std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Variable;
    n->index = index;
    n->name = std::move(name);
    return n;
}

NodePtr make_param(int index, std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Parameter;
    n->index = index;
    n->name = std::move(name);
    return n;
}

NodePtr make_neg_raw(NodePtr a) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Neg;
    n->a = std::move(a);
    return n;
}

NodePtr make_bin_raw(BinaryOp op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->bop = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr make_call_raw(Func fn, NodePtr a) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Call;
    n->fn = fn;
    n->a = std::move(a);
    return n;
}

bool is_const(const NodePtr& n, double v) {
    return n->kind == Node::Kind::Constant && n->value == v;
}

bool is_const(const NodePtr& n) { return n->kind == Node::Kind::Constant; }

} // namespace

ScalarExpr ex_const(double v) { return ScalarExpr(make_const(v)); }

ScalarExpr ex_var(int index, std::string name) {
    return ScalarExpr(make_var(index, std::move(name)));
}

ScalarExpr ex_neg(const ScalarExpr& x) {
    const NodePtr& a = x.root();
    if (is_const(a)) return ex_const(-a->value);
    if (a->kind == Node::Kind::Neg) return ScalarExpr(a->a);
    return ScalarExpr(make_neg_raw(a));
}

ScalarExpr ex_add(const ScalarExpr& x, const ScalarExpr& y) {
    const NodePtr &a = x.root(), &b = y.root();
    if (is_const(a) && is_const(b)) return ex_const(a->value + b->value);
    if (is_const(a, 0)) return y;
    if (is_const(b, 0)) return x;
    return ScalarExpr(make_bin_raw(BinaryOp::Add, a, b));
}

ScalarExpr ex_sub(const ScalarExpr& x, const ScalarExpr& y) {
    const NodePtr &a = x.root(), &b = y.root();
    if (is_const(a) && is_const(b)) return ex_const(a->value - b->value);
    if (is_const(b, 0)) return x;
    if (is_const(a, 0)) return ex_neg(y);
    return ScalarExpr(make_bin_raw(BinaryOp::Sub, a, b));
}

ScalarExpr ex_mul(const ScalarExpr& x, const ScalarExpr& y) {
    const NodePtr &a = x.root(), &b = y.root();
    if (is_const(a) && is_const(b)) return ex_const(a->value * b->value);
    if (is_const(a, 0) || is_const(b, 0)) return ex_const(0);
    if (is_const(a, 1)) return y;
    if (is_const(b, 1)) return x;
    if (is_const(a, -1)) return ex_neg(y);
    if (is_const(b, -1)) return ex_neg(x);
    return ScalarExpr(make_bin_raw(BinaryOp::Mul, a, b));
}

ScalarExpr ex_div(const ScalarExpr& x, const ScalarExpr& y) {
    const NodePtr &a = x.root(), &b = y.root();
    if (is_const(b) && b->value != 0 && is_const(a)) return ex_const(a->value / b->value);
    if (is_const(a, 0) && !(is_const(b) && b->value == 0)) return ex_const(0);
    if (is_const(b, 1)) return x;
    return ScalarExpr(make_bin_raw(BinaryOp::Div, a, b));
}

ScalarExpr ex_pow(const ScalarExpr& x, const ScalarExpr& y) {
    const NodePtr &a = x.root(), &b = y.root();
    if (is_const(b, 1)) return x;
    if (is_const(b, 0)) return ex_const(1);
    if (is_const(a) && is_const(b)) {
        double v = std::pow(a->value, b->value);
        if (std::isfinite(v)) return ex_const(v);
    }
    return ScalarExpr(make_bin_raw(BinaryOp::Pow, a, b));
}

ScalarExpr ex_call(Func fn, const ScalarExpr& x) {
    return ScalarExpr(make_call_raw(fn, x.root()));
}

ScalarExpr::ScalarExpr() : root_(make_const(0)) {}
ScalarExpr::ScalarExpr(double constant) : root_(make_const(constant)) {}

bool ScalarExpr::is_constant() const { return root_->kind == Node::Kind::Constant; }
bool ScalarExpr::is_zero() const { return is_const(root_, 0); }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double eval_node(const Node& n, std::span<const double> point, std::span<const double> params) {
    switch (n.kind) {
        case Node::Kind::Constant:
            return n.value;
        case Node::Kind::Variable:
            if (n.index < 0 || static_cast<std::size_t>(n.index) >= point.size())
                throw Error(ErrorKind::Domain, "point has no value for coordinate '" + n.name + "'");
            return point[static_cast<std::size_t>(n.index)];
        case Node::Kind::Parameter:
            if (n.index < 0 || static_cast<std::size_t>(n.index) >= params.size())
                throw Error(ErrorKind::Domain, "missing value for parameter '" + n.name + "'");
            return params[static_cast<std::size_t>(n.index)];
        case Node::Kind::Neg:
            return -eval_node(*n.a, point, params);
        case Node::Kind::Binary: {
            double a = eval_node(*n.a, point, params);
            double b = eval_node(*n.b, point, params);
            switch (n.bop) {
                case BinaryOp::Add: return a + b;
                case BinaryOp::Sub: return a - b;
                case BinaryOp::Mul: return a * b;
                case BinaryOp::Div:
                    if (b == 0) throw Error(ErrorKind::NonFinite, "division by zero");
                    return a / b;
                case BinaryOp::Pow: {
                    if (a < 0 && b != std::floor(b))
                        throw Error(ErrorKind::Domain, "negative base with non-integer exponent");
                    double v = std::pow(a, b);
                    return v;
                }
            }
            return 0;
        }
        case Node::Kind::Call: {
            double a = eval_node(*n.a, point, params);
            switch (n.fn) {
                case Func::Sin: return std::sin(a);
                case Func::Cos: return std::cos(a);
                case Func::Tan: return std::tan(a);
                case Func::Cot: {
                    double s = std::sin(a);
                    if (s == 0) throw Error(ErrorKind::NonFinite, "cot at a pole");
                    return std::cos(a) / s;
                }
                case Func::Sinh: return std::sinh(a);
                case Func::Cosh: return std::cosh(a);
                case Func::Exp: return std::exp(a);
                case Func::Ln:
                    if (a <= 0) throw Error(ErrorKind::Domain, "ln of non-positive value");
                    return std::log(a);
                case Func::Sqrt:
                    if (a < 0) throw Error(ErrorKind::Domain, "sqrt of negative value");
                    return std::sqrt(a);
                case Func::Abs: return std::fabs(a);
            }
            return 0;
        }
    }
    return 0;
}

} // namespace

double ScalarExpr::eval(std::span<const double> point, std::span<const double> params) const {
    double v = eval_node(*root_, point, params);
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "expression evaluated to a non-finite value");
    return v;
}

double ScalarExpr::eval(std::span<const double> point, const ParamTable& params) const {
    return eval(point, params.values());
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

ScalarExpr diff_node(const NodePtr& n, std::string_view var);

ScalarExpr diff_call(const NodePtr& n, std::string_view var) {
    ScalarExpr u(n->a);
    ScalarExpr du = diff_node(n->a, var);
    if (du.is_zero()) return ex_const(0);
    switch (n->fn) {
        case Func::Sin: return ex_mul(ex_call(Func::Cos, u), du);
        case Func::Cos: return ex_neg(ex_mul(ex_call(Func::Sin, u), du));
        case Func::Tan:
            return ex_mul(ex_add(ex_const(1), ex_pow(ex_call(Func::Tan, u), ex_const(2))), du);
        case Func::Cot:
            return ex_neg(
                ex_mul(ex_add(ex_const(1), ex_pow(ex_call(Func::Cot, u), ex_const(2))), du));
        case Func::Sinh: return ex_mul(ex_call(Func::Cosh, u), du);
        case Func::Cosh: return ex_mul(ex_call(Func::Sinh, u), du);
        case Func::Exp: return ex_mul(ex_call(Func::Exp, u), du);
        case Func::Ln: return ex_div(du, u);
        case Func::Sqrt: return ex_div(du, ex_mul(ex_const(2), ex_call(Func::Sqrt, u)));
        case Func::Abs: return ex_mul(ex_div(u, ex_call(Func::Abs, u)), du);
    }
    return ex_const(0);
}

ScalarExpr diff_node(const NodePtr& n, std::string_view var) {
    switch (n->kind) {
        case Node::Kind::Constant:
        case Node::Kind::Parameter:
            return ex_const(0);
        case Node::Kind::Variable:
            return ex_const(n->name == var ? 1 : 0);
        case Node::Kind::Neg:
            return ex_neg(diff_node(n->a, var));
        case Node::Kind::Binary: {
            ScalarExpr u(n->a), v(n->b);
            switch (n->bop) {
                case BinaryOp::Add: return ex_add(diff_node(n->a, var), diff_node(n->b, var));
                case BinaryOp::Sub: return ex_sub(diff_node(n->a, var), diff_node(n->b, var));
                case BinaryOp::Mul:
                    return ex_add(ex_mul(diff_node(n->a, var), v), ex_mul(u, diff_node(n->b, var)));
                case BinaryOp::Div:
                    return ex_div(ex_sub(ex_mul(diff_node(n->a, var), v),
                                         ex_mul(u, diff_node(n->b, var))),
                                  ex_pow(v, ex_const(2)));
                case BinaryOp::Pow: {
                    ScalarExpr du = diff_node(n->a, var);
                    ScalarExpr dv = diff_node(n->b, var);
                    if (dv.is_zero() && is_const(n->b)) {
                        double c = n->b->value;
                        return ex_mul(ex_mul(ex_const(c), ex_pow(u, ex_const(c - 1))), du);
                    }
                    // u^v = exp(v ln u)
                    return ex_mul(ex_pow(u, v),
                                  ex_add(ex_mul(dv, ex_call(Func::Ln, u)),
                                         ex_div(ex_mul(v, du), u)));
                }
            }
            return ex_const(0);
        }
        case Node::Kind::Call:
            return diff_call(n, var);
    }
    return ex_const(0);
}

} // namespace

ScalarExpr ScalarExpr::differentiate(std::string_view var) const {
    return diff_node(root_, var);
}

// ---------------------------------------------------------------------------
// Parser

namespace {

const std::pair<std::string_view, Func> kFuncs[] = {
    {"sin", Func::Sin},   {"cos", Func::Cos},   {"tan", Func::Tan}, {"cot", Func::Cot},
    {"sinh", Func::Sinh}, {"cosh", Func::Cosh}, {"exp", Func::Exp}, {"ln", Func::Ln},
    {"sqrt", Func::Sqrt}, {"abs", Func::Abs},
};

std::optional<Func> func_by_name(std::string_view s) {
    for (auto& [name, fn] : kFuncs)
        if (name == s) return fn;
    return std::nullopt;
}

class Parser {
  public:
    Parser(std::string_view src, std::span<const std::string> vars,
           std::span<const std::string> params)
        : src_(src), vars_(vars), params_(params) {}

    ScalarExpr run() {
        skip_ws();
        if (pos_ >= src_.size())
            throw Error(ErrorKind::Syntax, "empty expression", 0);
        ScalarExpr e = parse_sum();
        skip_ws();
        if (pos_ < src_.size())
            throw Error(ErrorKind::Syntax, "unexpected trailing input", pos_);
        return e;
    }

  private:
    std::string_view src_;
    std::span<const std::string> vars_;
    std::span<const std::string> params_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < src_.size() && src_[pos_] == c;
    }

    bool accept(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) {
        skip_ws();
        throw Error(ErrorKind::Syntax, what, std::min(pos_, src_.size()));
    }

    ScalarExpr parse_sum() {
        ScalarExpr e = parse_term();
        for (;;) {
            if (accept('+'))
                e = ScalarExpr(make_bin_raw(BinaryOp::Add, e.root(), parse_term().root()));
            else if (accept('-'))
                e = ScalarExpr(make_bin_raw(BinaryOp::Sub, e.root(), parse_term().root()));
            else
                return e;
        }
    }

    ScalarExpr parse_term() {
        ScalarExpr e = parse_factor();
        for (;;) {
            if (accept('*'))
                e = ScalarExpr(make_bin_raw(BinaryOp::Mul, e.root(), parse_factor().root()));
            else if (accept('/'))
                e = ScalarExpr(make_bin_raw(BinaryOp::Div, e.root(), parse_factor().root()));
            else
                return e;
        }
    }

    // factor handles unary minus; '^' binds tighter, so -x^2 is -(x^2).
    ScalarExpr parse_factor() {
        if (accept('-')) return ScalarExpr(make_neg_raw(parse_factor().root()));
        return parse_power();
    }

    ScalarExpr parse_power() {
        ScalarExpr base = parse_primary();
        if (accept('^'))
            return ScalarExpr(make_bin_raw(BinaryOp::Pow, base.root(), parse_factor().root()));
        return base;
    }

    ScalarExpr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of expression");
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            ScalarExpr e = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        fail("unexpected character");
    }

    ScalarExpr parse_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // 'e' belongs to a following identifier, not this number
            }
        }
        double v = 0;
        auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != src_.data() + pos_)
            throw Error(ErrorKind::Syntax, "malformed number", start);
        return ex_const(v);
    }

    ScalarExpr parse_ident() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string_view word = src_.substr(start, pos_ - start);
        if (auto fn = func_by_name(word)) {
            if (!accept('('))
                throw Error(ErrorKind::Syntax,
                            "function '" + std::string(word) + "' requires '('", pos_);
            ScalarExpr arg = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return ScalarExpr(make_call_raw(*fn, arg.root()));
        }
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == word) return ex_var(static_cast<int>(i), std::string(word));
        for (std::size_t i = 0; i < params_.size(); ++i)
            if (params_[i] == word)
                return ScalarExpr(make_param(static_cast<int>(i), std::string(word)));
        throw Error(ErrorKind::UnknownIdentifier,
                    "unknown identifier '" + std::string(word) + "'", start);
    }
};

} // namespace

ScalarExpr parse_expr(std::string_view source, std::span<const std::string> vars,
                      std::span<const std::string> params) {
    bool blank = true;
    for (char c : source)
        if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (source.empty() || blank) throw Error(ErrorKind::Syntax, "empty expression", 0);
    return Parser(source, vars, params).run();
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(const Node& n) {
    switch (n.kind) {
        case Node::Kind::Binary:
            switch (n.bop) {
                case BinaryOp::Add:
                case BinaryOp::Sub: return 1;
                case BinaryOp::Mul:
                case BinaryOp::Div: return 2;
                case BinaryOp::Pow: return 4;
            }
            return 1;
        case Node::Kind::Neg: return 3;
        default: return 5;
    }
}

std::string_view func_name(Func fn) {
    for (auto& [name, f] : kFuncs)
        if (f == fn) return name;
    return "?";
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void print_node(const Node& n, std::string& out) {
    auto child = [&](const NodePtr& c, bool parens) {
        if (parens) out += '(';
        print_node(*c, out);
        if (parens) out += ')';
    };
    switch (n.kind) {
        case Node::Kind::Constant: {
            if (n.value < 0) {
                out += "(";
                out += fmt_double(n.value);
                out += ")";
            } else {
                out += fmt_double(n.value);
            }
            return;
        }
        case Node::Kind::Variable:
        case Node::Kind::Parameter:
            out += n.name;
            return;
        case Node::Kind::Neg:
            out += '-';
            child(n.a, precedence(*n.a) < 5);
            return;
        case Node::Kind::Binary: {
            int p = precedence(n);
            const char* op = "?";
            // Right operands at equal precedence get parentheses so the
            // reparsed tree matches shape for shape (floating-point ops are
            // not associative, and eval must round-trip bit for bit).
            bool right_tighter = true;
            switch (n.bop) {
                case BinaryOp::Add: op = "+"; break;
                case BinaryOp::Sub: op = "-"; break;
                case BinaryOp::Mul: op = "*"; break;
                case BinaryOp::Div: op = "/"; break;
                case BinaryOp::Pow: op = "^"; right_tighter = false; break;
            }
            if (n.bop == BinaryOp::Pow) {
                child(n.a, precedence(*n.a) <= p);
                out += op;
                child(n.b, precedence(*n.b) < p);
            } else {
                child(n.a, precedence(*n.a) < p);
                out += op;
                child(n.b, precedence(*n.b) < p + (right_tighter ? 1 : 0));
            }
            return;
        }
        case Node::Kind::Call:
            out += func_name(n.fn);
            out += '(';
            print_node(*n.a, out);
            out += ')';
            return;
    }
}

} // namespace

std::string to_string(const ScalarExpr& e) {
    std::string out;
    print_node(*e.root(), out);
    return out;
}

// ---------------------------------------------------------------------------
// Rebinding

namespace {

NodePtr rebind_node(const NodePtr& n, std::span<const int> var_map, std::span<const int> param_map) {
    switch (n->kind) {
        case Node::Kind::Constant:
            return n;
        case Node::Kind::Variable: {
            if (n->index < 0 || static_cast<std::size_t>(n->index) >= var_map.size())
                throw Error(ErrorKind::Domain, "variable index out of range in rebind");
            return make_var(var_map[static_cast<std::size_t>(n->index)], n->name);
        }
        case Node::Kind::Parameter: {
            if (n->index < 0 || static_cast<std::size_t>(n->index) >= param_map.size())
                throw Error(ErrorKind::Domain, "parameter index out of range in rebind");
            return make_param(param_map[static_cast<std::size_t>(n->index)], n->name);
        }
        case Node::Kind::Neg:
            return make_neg_raw(rebind_node(n->a, var_map, param_map));
        case Node::Kind::Binary:
            return make_bin_raw(n->bop, rebind_node(n->a, var_map, param_map),
                                rebind_node(n->b, var_map, param_map));
        case Node::Kind::Call:
            return make_call_raw(n->fn, rebind_node(n->a, var_map, param_map));
    }
    return n;
}

} // namespace

ScalarExpr rebind(const ScalarExpr& e, std::span<const int> var_map,
                  std::span<const int> param_map) {
    return ScalarExpr(rebind_node(e.root(), var_map, param_map));
}

ScalarExpr normalized(const ScalarExpr& e) {
    const NodePtr& n = e.root();
    switch (n->kind) {
        case Node::Kind::Constant:
        case Node::Kind::Variable:
        case Node::Kind::Parameter:
            return e;
        case Node::Kind::Neg:
            return ex_neg(normalized(ScalarExpr(n->a)));
        case Node::Kind::Binary: {
            ScalarExpr a = normalized(ScalarExpr(n->a));
            ScalarExpr b = normalized(ScalarExpr(n->b));
            switch (n->bop) {
                case BinaryOp::Add: return ex_add(a, b);
                case BinaryOp::Sub: return ex_sub(a, b);
                case BinaryOp::Mul: return ex_mul(a, b);
                case BinaryOp::Div: return ex_div(a, b);
                case BinaryOp::Pow: return ex_pow(a, b);
            }
            return e;
        }
        case Node::Kind::Call:
            return ex_call(n->fn, normalized(ScalarExpr(n->a)));
    }
    return e;
}

} // namespace pwarp
