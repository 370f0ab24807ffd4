#pragma once

#include "pwarp/error.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pwarp {

// Ordered parameter table: names unique, values finite, insertion order is
// the index order used by parsed expressions.
class ParamTable {
  public:
    void set(std::string_view name, double value);
    bool has(std::string_view name) const;
    double get(std::string_view name) const;
    std::optional<int> index_of(std::string_view name) const;

    std::size_t size() const { return names_.size(); }
    std::span<const std::string> names() const { return names_; }
    std::span<const double> values() const { return values_; }

  private:
    std::vector<std::string> names_;
    std::vector<double> values_;
};

namespace detail {

enum class BinaryOp : unsigned char { Add, Sub, Mul, Div, Pow };

enum class Func : unsigned char { Sin, Cos, Tan, Cot, Sinh, Cosh, Exp, Ln, Sqrt, Abs };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind : unsigned char { Constant, Variable, Parameter, Neg, Binary, Call };

    Kind kind;
    double value = 0.0;  // Constant
    int index = -1;      // Variable: coordinate slot; Parameter: param slot
    std::string name;    // Variable / Parameter spelling
    BinaryOp bop = BinaryOp::Add;
    Func fn = Func::Sin;
    NodePtr a, b;        // operands (Neg and Call use `a` only)
};

} // namespace detail

// Immutable symbolic expression over named coordinates and parameters.
// Copy is cheap (shared AST); eval and differentiate are pure.
class ScalarExpr {
  public:
    ScalarExpr();  // the constant 0
    explicit ScalarExpr(double constant);
    explicit ScalarExpr(detail::NodePtr root) : root_(std::move(root)) {}

    double eval(std::span<const double> point, std::span<const double> params) const;
    double eval(std::span<const double> point, const ParamTable& params) const;

    // Exact derivative with respect to the named coordinate; output is
    // constant-folded (derivative of a constant is the literal 0).
    ScalarExpr differentiate(std::string_view var) const;

    bool is_constant() const;
    bool is_zero() const;

    const detail::NodePtr& root() const { return root_; }

  private:
    detail::NodePtr root_;
};

// Grammar: + - * / ^ (usual precedence, ^ right-associative), unary minus,
// parentheses, decimal/scientific numbers, calls from the fixed function set
// {sin cos tan cot sinh cosh exp ln sqrt abs}.  Identifiers must appear in
// `vars` or `params`; anything else is rejected with its byte offset.
ScalarExpr parse_expr(std::string_view source, std::span<const std::string> vars,
                      std::span<const std::string> params);

// Emits text that parse_expr accepts and that evaluates identically.
std::string to_string(const ScalarExpr& e);

// Remaps variable/parameter slots, e.g. when lifting a factor expression onto
// a product chart.  var_map/param_map give the new index for each old index.
ScalarExpr rebind(const ScalarExpr& e, std::span<const int> var_map,
                  std::span<const int> param_map);

// Rebuilds the tree bottom-up through the folding constructors, collapsing
// literal arithmetic (for instance a parsed "-1" becomes the constant -1, so
// derived tables fold cleanly).  Evaluation is unchanged.
ScalarExpr normalized(const ScalarExpr& e);

// Smart constructors with constant folding and identity elimination.
ScalarExpr ex_const(double v);
ScalarExpr ex_var(int index, std::string name);
ScalarExpr ex_add(const ScalarExpr& x, const ScalarExpr& y);
ScalarExpr ex_sub(const ScalarExpr& x, const ScalarExpr& y);
ScalarExpr ex_mul(const ScalarExpr& x, const ScalarExpr& y);
ScalarExpr ex_div(const ScalarExpr& x, const ScalarExpr& y);
ScalarExpr ex_pow(const ScalarExpr& x, const ScalarExpr& y);
ScalarExpr ex_neg(const ScalarExpr& x);
ScalarExpr ex_call(detail::Func fn, const ScalarExpr& x);

} // namespace pwarp
