#include "fragfem/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "fragfem/errors.hpp"

namespace fragfem {

struct Expression::Node {
  enum Kind { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Exp } kind;
  double value = 0.0;
  int var = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using N = Expression::Node;

NodePtr num(double v) { return std::make_shared<N>(N{N::Num, v, 0, nullptr, nullptr}); }
NodePtr var(int i) { return std::make_shared<N>(N{N::Var, 0.0, i, nullptr, nullptr}); }
NodePtr node(N::Kind k, NodePtr a, NodePtr b = nullptr) {
  return std::make_shared<N>(N{k, 0.0, 0, std::move(a), std::move(b)});
}

bool is_num(const NodePtr& p, double v) { return p->kind == N::Num && p->value == v; }

NodePtr add(NodePtr a, NodePtr b) {
  if (is_num(a, 0.0)) return b;
  if (is_num(b, 0.0)) return a;
  if (a->kind == N::Num && b->kind == N::Num) return num(a->value + b->value);
  return node(N::Add, a, b);
}
NodePtr sub(NodePtr a, NodePtr b) {
  if (is_num(b, 0.0)) return a;
  if (a->kind == N::Num && b->kind == N::Num) return num(a->value - b->value);
  if (is_num(a, 0.0)) return b->kind == N::Neg ? b->a : node(N::Neg, b);
  return node(N::Sub, a, b);
}
NodePtr mul(NodePtr a, NodePtr b) {
  if (is_num(a, 0.0) || is_num(b, 0.0)) return num(0.0);
  if (is_num(a, 1.0)) return b;
  if (is_num(b, 1.0)) return a;
  if (a->kind == N::Num && b->kind == N::Num) return num(a->value * b->value);
  return node(N::Mul, a, b);
}
NodePtr div(NodePtr a, NodePtr b) {
  if (is_num(a, 0.0)) return num(0.0);
  if (is_num(b, 1.0)) return a;
  return node(N::Div, a, b);
}
NodePtr neg(NodePtr a) {
  if (a->kind == N::Num) return num(-a->value);
  if (a->kind == N::Neg) return a->a;
  return node(N::Neg, a);
}
NodePtr power(NodePtr a, NodePtr b) {
  if (is_num(b, 1.0)) return a;
  if (is_num(b, 0.0)) return num(1.0);
  return node(N::Pow, a, b);
}

bool depends(const NodePtr& p, int v) {
  switch (p->kind) {
    case N::Num:
      return false;
    case N::Var:
      return p->var == v;
    case N::Neg:
    case N::Exp:
      return depends(p->a, v);
    default:
      return depends(p->a, v) || depends(p->b, v);
  }
}

NodePtr diff(const NodePtr& p, int v) {
  switch (p->kind) {
    case N::Num:
      return num(0.0);
    case N::Var:
      return num(p->var == v ? 1.0 : 0.0);
    case N::Add:
      return add(diff(p->a, v), diff(p->b, v));
    case N::Sub:
      return sub(diff(p->a, v), diff(p->b, v));
    case N::Mul:
      return add(mul(diff(p->a, v), p->b), mul(p->a, diff(p->b, v)));
    case N::Div:
      return div(sub(mul(diff(p->a, v), p->b), mul(p->a, diff(p->b, v))), mul(p->b, p->b));
    case N::Neg:
      return neg(diff(p->a, v));
    case N::Exp:
      return mul(p, diff(p->a, v));
    case N::Pow: {
      if (depends(p->b, v)) throw Error("derivative of a power with variable exponent is not supported");
      NodePtr exponent_minus_one =
          p->b->kind == N::Num ? num(p->b->value - 1.0) : sub(p->b, num(1.0));
      return mul(mul(p->b, power(p->a, exponent_minus_one)), diff(p->a, v));
    }
  }
  return num(0.0);
}

bool equal(const NodePtr& x, const NodePtr& y) {
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case N::Num:
      return x->value == y->value;
    case N::Var:
      return x->var == y->var;
    case N::Neg:
    case N::Exp:
      return equal(x->a, y->a);
    default:
      return equal(x->a, y->a) && equal(x->b, y->b);
  }
}

const char* kVarNames[] = {"x1", "x2", "x3", "y1", "y2", "y3", "t"};

void print(const NodePtr& p, std::string& out) {
  switch (p->kind) {
    case N::Num: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", std::abs(p->value));
      if (std::signbit(p->value))
        out += std::string("(-") + buf + ")";
      else
        out += buf;
      return;
    }
    case N::Var:
      out += kVarNames[p->var];
      return;
    case N::Neg:
      out += "(-";
      print(p->a, out);
      out += ")";
      return;
    case N::Exp:
      out += "exp(";
      print(p->a, out);
      out += ")";
      return;
    default:
      break;
  }
  static const char ops[] = {' ', ' ', '+', '-', '*', '/', '^'};
  out += "(";
  print(p->a, out);
  out += ops[p->kind];
  print(p->b, out);
  out += ")";
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr parse() {
    skip();
    if (pos_ >= s_.size()) throw SyntaxError("empty expression", pos_);
    NodePtr e = expr();
    skip();
    if (pos_ < s_.size()) throw SyntaxError(std::string("unexpected '") + s_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= s_.size()) throw SyntaxError(std::string("expected '") + c + "' before end of input", pos_);
      throw SyntaxError(std::string("expected '") + c + "'", pos_);
    }
  }

  NodePtr expr() {
    NodePtr e = term();
    for (;;) {
      if (accept('+'))
        e = node(N::Add, e, term());
      else if (accept('-'))
        e = node(N::Sub, e, term());
      else
        return e;
    }
  }
  NodePtr term() {
    NodePtr e = unary();
    for (;;) {
      if (accept('*'))
        e = node(N::Mul, e, unary());
      else if (accept('/'))
        e = node(N::Div, e, unary());
      else
        return e;
    }
  }
  NodePtr unary() {
    if (accept('-')) return node(N::Neg, unary());
    NodePtr b = base();
    if (accept('^')) return node(N::Pow, b, unary());
    return b;
  }
  NodePtr base() {
    skip();
    if (pos_ >= s_.size()) throw SyntaxError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      std::string name(s_.substr(start, pos_ - start));
      if (name == "exp") {
        expect('(');
        NodePtr e = expr();
        expect(')');
        return node(N::Exp, e);
      }
      for (int i = 0; i < 7; ++i)
        if (name == kVarNames[i]) return var(i);
      throw UnknownIdentifier(name);
    }
    throw SyntaxError(std::string("unexpected '") + c + "'", pos_);
  }
  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t n = digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) throw SyntaxError("malformed number", start);
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    std::string text(s_.substr(start, pos_ - start));
    double v = std::strtod(text.c_str(), nullptr);
    if (!std::isfinite(v)) throw SyntaxError("number out of range", start);
    return num(v);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

enum Op { kConst, kVar, kAdd, kSub, kMul, kDiv, kPow, kPowInt, kNeg, kExp };

int emit(const NodePtr& p, std::vector<int>& ops, std::vector<int>& args, std::vector<double>& vals) {
  auto push = [&](int op, int arg, double v) {
    ops.push_back(op);
    args.push_back(arg);
    vals.push_back(v);
  };
  switch (p->kind) {
    case N::Num:
      push(kConst, 0, p->value);
      return 1;
    case N::Var:
      push(kVar, p->var, 0.0);
      return 1;
    case N::Neg: {
      int d = emit(p->a, ops, args, vals);
      push(kNeg, 0, 0.0);
      return d;
    }
    case N::Exp: {
      int d = emit(p->a, ops, args, vals);
      push(kExp, 0, 0.0);
      return d;
    }
    case N::Pow:
      if (p->b->kind == N::Num && p->b->value == std::round(p->b->value) && std::abs(p->b->value) <= 16) {
        int d = emit(p->a, ops, args, vals);
        push(kPowInt, static_cast<int>(p->b->value), 0.0);
        return d;
      }
      [[fallthrough]];
    default: {
      int da = emit(p->a, ops, args, vals);
      int db = emit(p->b, ops, args, vals);
      static const int map[] = {0, 0, kAdd, kSub, kMul, kDiv, kPow};
      push(map[p->kind], 0, 0.0);
      return std::max(da, db + 1);
    }
  }
}

double pow_int(double x, int n) {
  bool inv = n < 0;
  unsigned m = static_cast<unsigned>(inv ? -n : n);
  double r = 1.0, b = x;
  while (m) {
    if (m & 1u) r *= b;
    b *= b;
    m >>= 1u;
  }
  return inv ? 1.0 / r : r;
}

}  // namespace

Expression::Expression() : Expression(num(0.0)) {}

Expression::Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) { compile(); }

Expression Expression::parse(std::string_view source) { return Expression(Parser(source).parse()); }

Expression Expression::constant(double value) { return Expression(num(value)); }

void Expression::compile() {
  std::vector<int> ops, args;
  std::vector<double> vals;
  stack_depth_ = emit(root_, ops, args, vals);
  program_.resize(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) program_[i] = {ops[i], args[i], vals[i]};
}

double Expression::operator()(const Variables& v) const {
  double small[32] = {};
  std::vector<double> big;
  double* st = small;
  if (stack_depth_ > 32) {
    big.resize(stack_depth_);
    st = big.data();
  }
  int top = -1;
  for (const Instr& in : program_) {
    switch (in.op) {
      case kConst:
        st[++top] = in.value;
        break;
      case kVar:
        st[++top] = v[in.arg];
        break;
      case kAdd:
        st[top - 1] += st[top];
        --top;
        break;
      case kSub:
        st[top - 1] -= st[top];
        --top;
        break;
      case kMul:
        st[top - 1] *= st[top];
        --top;
        break;
      case kDiv:
        st[top - 1] /= st[top];
        --top;
        break;
      case kPow:
        st[top - 1] = std::pow(st[top - 1], st[top]);
        --top;
        break;
      case kPowInt:
        st[top] = pow_int(st[top], in.arg);
        break;
      case kNeg:
        st[top] = -st[top];
        break;
      case kExp:
        st[top] = std::exp(st[top]);
        break;
    }
  }
  return st[0];
}

std::string Expression::to_string() const {
  std::string out;
  print(root_, out);
  return out;
}

Expression Expression::derivative(Variable v) const { return Expression(diff(root_, static_cast<int>(v))); }

bool Expression::depends_on(Variable v) const { return depends(root_, static_cast<int>(v)); }

bool Expression::depends_on_any(std::initializer_list<Variable> vs) const {
  for (Variable v : vs)
    if (depends_on(v)) return true;
  return false;
}

bool Expression::is_constant() const {
  for (int i = 0; i < 7; ++i)
    if (depends(root_, i)) return false;
  return true;
}

bool Expression::operator==(const Expression& other) const { return equal(root_, other.root_); }

}  // namespace fragfem
