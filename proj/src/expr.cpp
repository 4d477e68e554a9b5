#include "fmbsde/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fmbsde {

namespace {

enum class Op { Add, Sub, Mul, Div, Pow, Neg, Num, Var, Call };

const char* const kFunctions[] = {"exp", "log", "sin", "cos", "abs", "sqrt", "tanh", "max", "min"};

bool is_function(const std::string& name) {
  for (const char* f : kFunctions)
    if (name == f) return true;
  return false;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

struct Expression::Node {
  Op op;
  double num = 0.0;
  std::size_t var_index = 0;
  std::string name;  // function or variable name
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

struct Parser {
  const std::string& src;
  const std::vector<std::string>& vars;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool consume(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos + 1); }

  NodePtr make(Op op, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  NodePtr parse_sum() {
    NodePtr left = parse_product();
    for (;;) {
      if (consume('+'))
        left = make(Op::Add, left, parse_product());
      else if (consume('-'))
        left = make(Op::Sub, left, parse_product());
      else
        return left;
    }
  }

  NodePtr parse_product() {
    NodePtr left = parse_unary();
    for (;;) {
      if (consume('*'))
        left = make(Op::Mul, left, parse_unary());
      else if (consume('/'))
        left = make(Op::Div, left, parse_unary());
      else
        return left;
    }
  }

  NodePtr parse_unary() {
    if (consume('-')) return make(Op::Neg, parse_unary());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (consume('^')) {
      // right-associative; the exponent may carry its own unary minus
      NodePtr exp = consume('-') ? make(Op::Neg, parse_power()) : parse_power();
      return make(Op::Pow, base, exp);
    }
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos >= src.size()) fail("unexpected end of expression");
    char c = src[pos];
    if (c == '(') {
      ++pos;
      NodePtr inner = parse_sum();
      if (!consume(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.' ||
            src[pos] == 'e' || src[pos] == 'E' ||
            ((src[pos] == '+' || src[pos] == '-') && pos > start &&
             (src[pos - 1] == 'e' || src[pos - 1] == 'E'))))
      ++pos;
    try {
      auto n = std::make_shared<Expression::Node>();
      n->op = Op::Num;
      n->num = std::stod(src.substr(start, pos - start));
      return n;
    } catch (const std::exception&) {
      pos = start;
      fail("malformed number");
    }
  }

  NodePtr parse_ident() {
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    std::string name = src.substr(start, pos - start);
    if (is_function(name)) {
      if (!consume('(')) {
        pos = start;
        fail("function '" + name + "' needs parenthesized arguments");
      }
      auto n = std::make_shared<Expression::Node>();
      n->op = Op::Call;
      n->name = name;
      n->lhs = parse_sum();
      if (name == "max" || name == "min") {
        if (!consume(',')) fail("'" + name + "' takes two arguments");
        n->rhs = parse_sum();
      }
      if (!consume(')')) fail("expected ')'");
      return n;
    }
    auto it = std::find(vars.begin(), vars.end(), name);
    if (it == vars.end()) {
      std::string best;
      std::size_t best_d = name.size();
      for (const auto& v : vars) {
        std::size_t d = edit_distance(name, v);
        if (d < best_d) {
          best_d = d;
          best = v;
        }
      }
      pos = start;
      fail("unknown identifier '" + name + "'" +
           (best.empty() ? "" : ", did you mean '" + best + "'?"));
    }
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Var;
    n->name = name;
    n->var_index = static_cast<std::size_t>(it - vars.begin());
    return n;
  }
};

double eval_node(const Expression::Node& n, std::span<const double> values) {
  switch (n.op) {
    case Op::Num:
      return n.num;
    case Op::Var:
      return values[n.var_index];
    case Op::Add:
      return eval_node(*n.lhs, values) + eval_node(*n.rhs, values);
    case Op::Sub:
      return eval_node(*n.lhs, values) - eval_node(*n.rhs, values);
    case Op::Mul:
      return eval_node(*n.lhs, values) * eval_node(*n.rhs, values);
    case Op::Div: {
      double d = eval_node(*n.rhs, values);
      if (d == 0.0) throw std::domain_error("expression: division by zero");
      return eval_node(*n.lhs, values) / d;
    }
    case Op::Pow:
      return std::pow(eval_node(*n.lhs, values), eval_node(*n.rhs, values));
    case Op::Neg:
      return -eval_node(*n.lhs, values);
    case Op::Call: {
      double a = eval_node(*n.lhs, values);
      if (n.name == "exp") return std::exp(a);
      if (n.name == "log") {
        if (a <= 0.0) throw std::domain_error("expression: log of a nonpositive value");
        return std::log(a);
      }
      if (n.name == "sin") return std::sin(a);
      if (n.name == "cos") return std::cos(a);
      if (n.name == "abs") return std::abs(a);
      if (n.name == "sqrt") {
        if (a < 0.0) throw std::domain_error("expression: sqrt of a negative value");
        return std::sqrt(a);
      }
      if (n.name == "tanh") return std::tanh(a);
      double b = eval_node(*n.rhs, values);
      return n.name == "max" ? std::max(a, b) : std::min(a, b);
    }
  }
  return 0.0;
}

void print_node(const Expression::Node& n, std::ostringstream& out) {
  switch (n.op) {
    case Op::Num: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.num);
      out << buf;
      return;
    }
    case Op::Var:
      out << n.name;
      return;
    case Op::Neg:
      out << "(-";
      print_node(*n.lhs, out);
      out << ')';
      return;
    case Op::Call:
      out << n.name << '(';
      print_node(*n.lhs, out);
      if (n.rhs) {
        out << ',';
        print_node(*n.rhs, out);
      }
      out << ')';
      return;
    default: {
      const char* sym = n.op == Op::Add   ? "+"
                        : n.op == Op::Sub ? "-"
                        : n.op == Op::Mul ? "*"
                        : n.op == Op::Div ? "/"
                                          : "^";
      out << '(';
      print_node(*n.lhs, out);
      out << sym;
      print_node(*n.rhs, out);
      out << ')';
    }
  }
}

bool node_mentions(const Expression::Node& n, std::span<const std::string> names) {
  if (n.op == Op::Var)
    return std::find(names.begin(), names.end(), n.name) != names.end();
  return (n.lhs && node_mentions(*n.lhs, names)) || (n.rhs && node_mentions(*n.rhs, names));
}

}  // namespace

Expression Expression::parse(const std::string& src, std::vector<std::string> variables) {
  if (src.empty()) throw ParseError("empty expression", 1);
  Parser p{src, variables};
  NodePtr root = p.parse_sum();
  p.skip_ws();
  if (p.pos != src.size()) p.fail("trailing input after expression");
  Expression e;
  e.root_ = std::move(root);
  e.vars_ = std::move(variables);
  return e;
}

double Expression::eval(std::span<const double> values) const {
  if (values.size() != vars_.size())
    throw std::invalid_argument("Expression::eval: wrong number of variable values");
  return eval_node(*root_, values);
}

std::string Expression::print() const {
  std::ostringstream out;
  print_node(*root_, out);
  return out.str();
}

bool Expression::mentions(std::span<const std::string> names) const {
  return node_mentions(*root_, names);
}

}  // namespace fmbsde
