#include "finsler/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>

namespace finsler {

namespace {

constexpr const char* kFunctions[] = {"sqrt", "exp", "log", "sin", "cos"};
constexpr const char* kRejected[] = {"abs", "min", "max", "sign", "floor", "ceil"};

int function_id(std::string_view name) {
  for (int i = 0; i < 5; ++i) {
    if (name == kFunctions[i]) return i;
  }
  return -1;
}

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make(NodeKind k, std::size_t pos, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->position = pos;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse_all() {
    auto e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "', expected operator or end of input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  NodePtr expr() {
    auto lhs = term();
    while (true) {
      if (peek('+')) {
        auto p = pos_++;
        lhs = make(NodeKind::add, p, lhs, term());
      } else if (peek('-')) {
        auto p = pos_++;
        lhs = make(NodeKind::sub, p, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = factor();
    while (true) {
      if (peek('*')) {
        auto p = pos_++;
        lhs = make(NodeKind::mul, p, lhs, factor());
      } else if (peek('/')) {
        auto p = pos_++;
        lhs = make(NodeKind::div, p, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr factor() {
    auto base = atom();
    if (peek('^')) {
      auto p = pos_++;
      skip_ws();
      if (pos_ >= src_.size() || !(std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
        fail("expected number after '^' (exponents must be constants)");
      }
      auto n = std::make_shared<ExprNode>(*make(NodeKind::power, p, base));
      n->number = number();
      return n;
    }
    return base;
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ == start || (pos_ == start + 1 && src_[start] == '.')) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        pos_ = save;
        fail("malformed exponent in number");
      }
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    double v = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc()) {
      pos_ = start;
      fail("number out of range");
    }
    return v;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input, expected number, identifier, '(' or '-'");
    const char c = src_[pos_];
    const std::size_t p = pos_;
    if (c == '-') {
      ++pos_;
      return make(NodeKind::negate, p, atom());
    }
    if (c == '(') {
      ++pos_;
      auto e = expr();
      if (!peek(')')) fail("expected ')'");
      ++pos_;
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      auto n = std::make_shared<ExprNode>(*make(NodeKind::constant, p));
      n->number = number();
      return n;
    }
    if (c >= 'a' && c <= 'z') {
      while (pos_ < src_.size() &&
             ((src_[pos_] >= 'a' && src_[pos_] <= 'z') || std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_')) {
        ++pos_;
      }
      std::string name(src_.substr(p, pos_ - p));
      if (peek('(')) {
        if (function_id(name) < 0) {
          pos_ = p;
          if (std::find(std::begin(kRejected), std::end(kRejected), name) != std::end(kRejected)) {
            fail("non-smooth function '" + name + "' is not supported");
          }
          fail("unknown function '" + name + "' (expected sqrt, exp, log, sin or cos)");
        }
        ++pos_;
        auto arg = expr();
        if (!peek(')')) fail("expected ')' to close call to " + name);
        ++pos_;
        auto n = std::make_shared<ExprNode>(*make(NodeKind::call, p, arg));
        n->name = name;
        return n;
      }
      auto n = std::make_shared<ExprNode>(*make(NodeKind::variable, p));
      n->name = std::move(name);
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "', expected number, identifier, '(' or '-'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int precedence(NodeKind k) {
  switch (k) {
    case NodeKind::add:
    case NodeKind::sub: return 1;
    case NodeKind::mul:
    case NodeKind::div: return 2;
    case NodeKind::negate: return 3;
    case NodeKind::power: return 4;
    default: return 5;
  }
}

void print_node(const ExprNode& n, std::string& out);

// Children are parenthesized whenever re-parsing could regroup them.
void print_child(const ExprNode& child, int parent_prec, bool right, std::string& out) {
  const int cp = precedence(child.kind);
  bool paren = cp < parent_prec || (right && cp == parent_prec && parent_prec <= 2);
  // Negative literals and negations need parentheses under '^'.
  if (parent_prec == 4 && (child.kind == NodeKind::negate || cp <= 4)) paren = true;
  if (child.kind == NodeKind::constant && child.number < 0) paren = true;
  if (paren) out += '(';
  print_node(child, out);
  if (paren) out += ')';
}

void print_node(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::constant: out += format_number(n.number); break;
    case NodeKind::variable: out += n.name; break;
    case NodeKind::add:
    case NodeKind::sub:
    case NodeKind::mul:
    case NodeKind::div: {
      const int p = precedence(n.kind);
      print_child(*n.lhs, p, false, out);
      out += n.kind == NodeKind::add ? " + " : n.kind == NodeKind::sub ? " - " : n.kind == NodeKind::mul ? "*" : "/";
      print_child(*n.rhs, p, true, out);
      break;
    }
    case NodeKind::power:
      print_child(*n.lhs, 4, false, out);
      out += '^';
      out += format_number(n.number);
      break;
    case NodeKind::negate:
      out += '-';
      // '-' atom: anything but an atom needs parentheses.
      if (precedence(n.lhs->kind) < 5 || (n.lhs->kind == NodeKind::constant && n.lhs->number < 0)) {
        out += '(';
        print_node(*n.lhs, out);
        out += ')';
      } else {
        print_node(*n.lhs, out);
      }
      break;
    case NodeKind::call:
      out += n.name;
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      break;
  }
}

bool equal_nodes(const ExprNode* a, const ExprNode* b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->name != b->name) return false;
  if ((a->kind == NodeKind::constant || a->kind == NodeKind::power) && a->number != b->number) return false;
  return equal_nodes(a->lhs.get(), b->lhs.get()) && equal_nodes(a->rhs.get(), b->rhs.get());
}

void collect_vars(const ExprNode* n, std::set<std::string>& out) {
  if (!n) return;
  if (n->kind == NodeKind::variable) out.insert(n->name);
  collect_vars(n->lhs.get(), out);
  collect_vars(n->rhs.get(), out);
}

}  // namespace

Expression::Expression(std::shared_ptr<const ExprNode> root, std::string source)
    : root_(std::move(root)), source_(std::move(source)) {}

std::set<std::string> Expression::free_variables() const {
  std::set<std::string> out;
  collect_vars(root_.get(), out);
  return out;
}

void Expression::validate(const std::set<std::string>& declared) const {
  for (const auto& v : free_variables()) {
    if (!declared.count(v)) {
      std::string allowed;
      for (const auto& d : declared) allowed += (allowed.empty() ? "" : ", ") + d;
      throw InputError("unknown variable '" + v + "' in expression \"" + print() +
                       "\" (allowed: " + allowed + ")");
    }
  }
}

std::string Expression::print() const {
  std::string out;
  if (root_) print_node(*root_, out);
  return out;
}

bool Expression::operator==(const Expression& other) const {
  return equal_nodes(root_.get(), other.root_.get());
}

Expression parse(std::string_view source) {
  Parser p(source);
  return Expression(p.parse_all(), std::string(source));
}

// ---------------------------------------------------------------------------

CompiledExpression::CompiledExpression(const Expression& expr, const std::vector<std::string>& slots)
    : expr_(expr), slot_count_(slots.size()) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < slots.size(); ++i) index[slots[i]] = static_cast<int>(i);
  expr.validate({slots.begin(), slots.end()});
  std::function<void(const ExprNode&)> emit = [&](const ExprNode& n) {
    if (n.lhs) emit(*n.lhs);
    if (n.rhs) emit(*n.rhs);
    Op op{n.kind, n.number, -1, -1, n.position};
    if (n.kind == NodeKind::variable) op.slot = index.at(n.name);
    if (n.kind == NodeKind::call) op.fn = function_id(n.name);
    program_.push_back(op);
  };
  emit(expr.root());
}

double CompiledExpression::eval(std::span<const double> values) const {
  std::vector<double> stack;
  stack.reserve(16);
  for (const auto& op : program_) {
    switch (op.kind) {
      case NodeKind::constant: stack.push_back(op.number); break;
      case NodeKind::variable: stack.push_back(values[op.slot]); break;
      case NodeKind::negate: stack.back() = -stack.back(); break;
      case NodeKind::power: {
        double& b = stack.back();
        if (op.number != std::floor(op.number) && !(b > 0.0)) {
          throw DomainError("pow(" + format_number(op.number) + ") of non-positive value " +
                            format_number(b) + " at position " + std::to_string(op.position));
        }
        b = std::pow(b, op.number);
        break;
      }
      case NodeKind::call: {
        double& a = stack.back();
        switch (op.fn) {
          case 0:
            if (!(a > 0.0)) throw DomainError("sqrt of non-positive value " + format_number(a) + " at position " + std::to_string(op.position));
            a = std::sqrt(a);
            break;
          case 1: a = std::exp(a); break;
          case 2:
            if (!(a > 0.0)) throw DomainError("log of non-positive value " + format_number(a) + " at position " + std::to_string(op.position));
            a = std::log(a);
            break;
          case 3: a = std::sin(a); break;
          default: a = std::cos(a); break;
        }
        break;
      }
      default: {
        const double r = stack.back();
        stack.pop_back();
        double& l = stack.back();
        switch (op.kind) {
          case NodeKind::add: l += r; break;
          case NodeKind::sub: l -= r; break;
          case NodeKind::mul: l *= r; break;
          default:
            if (r == 0.0) throw DomainError("division by zero at position " + std::to_string(op.position));
            l /= r;
            break;
        }
      }
    }
  }
  return stack.back();
}

Jet CompiledExpression::eval(std::span<const Jet> values) const {
  if (values.empty()) throw InputError("expression evaluation needs at least one jet binding");
  const JetConfig cfg = values[0].config();
  std::vector<Jet> stack;
  stack.reserve(16);
  for (const auto& op : program_) {
    try {
      switch (op.kind) {
        case NodeKind::constant: stack.push_back(Jet::constant(cfg, op.number)); break;
        case NodeKind::variable: stack.push_back(values[op.slot]); break;
        case NodeKind::negate: stack.back() = -stack.back(); break;
        case NodeKind::power: stack.back() = pow(stack.back(), op.number); break;
        case NodeKind::call: {
          Jet& a = stack.back();
          static constexpr UnaryFn fns[] = {UnaryFn::sqrt, UnaryFn::exp, UnaryFn::log, UnaryFn::sin, UnaryFn::cos};
          a = jet_unary(a, fns[op.fn]);
          break;
        }
        default: {
          Jet r = std::move(stack.back());
          stack.pop_back();
          Jet& l = stack.back();
          switch (op.kind) {
            case NodeKind::add: l += r; break;
            case NodeKind::sub: l -= r; break;
            case NodeKind::mul: l = l * r; break;
            default: l = l / r; break;
          }
        }
      }
    } catch (const DomainError& e) {
      throw DomainError(std::string(e.what()) + " at position " + std::to_string(op.position) +
                        " of \"" + expr_.print() + "\"");
    }
  }
  return stack.back();
}

Jet eval_on_jets(const Expression& ast, const std::vector<std::pair<std::string, Jet>>& env) {
  std::vector<std::string> names;
  std::vector<Jet> jets;
  for (const auto& [n, j] : env) {
    names.push_back(n);
    jets.push_back(j);
  }
  for (std::size_t i = 1; i < jets.size(); ++i) {
    if (jets[i].num_vars() != jets[0].num_vars()) throw ConfigError("eval_on_jets: bound jets disagree on variable count");
  }
  for (const auto& v : ast.free_variables()) {
    if (std::find(names.begin(), names.end(), v) == names.end()) {
      throw InputError("unbound variable '" + v + "'");
    }
  }
  CompiledExpression c(ast, names);
  return c.eval(std::span<const Jet>(jets));
}

}  // namespace finsler
