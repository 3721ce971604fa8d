#include "dpeigen/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

namespace dpeigen {

namespace {

enum class NodeKind {
  number,
  var_x,
  var_y,
  negate,
  add,
  subtract,
  multiply,
  divide,
  call_sin,
  call_cos,
  call_exp,
  call_min,
  call_max,
};

}  // namespace

struct Expression::Node {
  NodeKind kind;
  double value = 0.0;  // number payload
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error("parse error at position " + std::to_string(position) +
                         ": " + message),
      position_(position) {}

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr makeNode(NodeKind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto node = std::make_shared<Expression::Node>();
  node->kind = kind;
  node->lhs = std::move(lhs);
  node->rhs = std::move(rhs);
  return node;
}

NodePtr makeNumber(double value) {
  auto node = std::make_shared<Expression::Node>();
  node->kind = NodeKind::number;
  node->value = value;
  return node;
}

// Recursive-descent parser over the raw text. Positions are 1-based.
class Parser {
public:
  explicit Parser(const std::string& text) : text_(text) {}

  NodePtr run() {
    NodePtr root = parseExpr();
    skipSpace();
    if (pos_ != text_.size()) {
      fail("unexpected trailing input");
    }
    return root;
  }

private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, pos_ + 1);
  }

  void skipSpace() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool consume(char c) {
    skipSpace();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const std::string& what) {
    if (!consume(c)) {
      fail("expected '" + std::string(1, c) + "' " + what);
    }
  }

  NodePtr parseExpr() {
    NodePtr lhs = parseTerm();
    for (;;) {
      if (consume('+')) {
        lhs = makeNode(NodeKind::add, lhs, parseTerm());
      } else if (consume('-')) {
        lhs = makeNode(NodeKind::subtract, lhs, parseTerm());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parseTerm() {
    NodePtr lhs = parseUnary();
    for (;;) {
      if (consume('*')) {
        lhs = makeNode(NodeKind::multiply, lhs, parseUnary());
      } else if (consume('/')) {
        lhs = makeNode(NodeKind::divide, lhs, parseUnary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parseUnary() {
    if (consume('-')) {
      return makeNode(NodeKind::negate, parseUnary());
    }
    if (consume('+')) {
      return parseUnary();
    }
    return parsePrimary();
  }

  NodePtr parsePrimary() {
    skipSpace();
    if (pos_ >= text_.size()) {
      fail("unexpected end of expression");
    }
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parseNumber();
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      return parseNameOrCall();
    }
    if (c == '(') {
      ++pos_;
      NodePtr inner = parseExpr();
      expect(')', "to close parenthesis");
      return inner;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parseNumber() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin) {
      fail("malformed number");
    }
    if (!std::isfinite(value)) {
      fail("number out of range");
    }
    pos_ += static_cast<std::size_t>(end - begin);
    return makeNumber(value);
  }

  NodePtr parseNameOrCall() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    std::string name = text_.substr(start, pos_ - start);
    if (name == "x") {
      return makeNode(NodeKind::var_x);
    }
    if (name == "y") {
      return makeNode(NodeKind::var_y);
    }

    NodeKind kind;
    int arity = 1;
    if (name == "sin") {
      kind = NodeKind::call_sin;
    } else if (name == "cos") {
      kind = NodeKind::call_cos;
    } else if (name == "exp") {
      kind = NodeKind::call_exp;
    } else if (name == "min") {
      kind = NodeKind::call_min;
      arity = 2;
    } else if (name == "max") {
      kind = NodeKind::call_max;
      arity = 2;
    } else {
      pos_ = start;
      fail("unknown name '" + name + "'");
    }

    expect('(', "after function name '" + name + "'");
    NodePtr first = parseExpr();
    if (arity == 1) {
      expect(')', "to close call to '" + name + "'");
      return makeNode(kind, first);
    }
    expect(',', "between arguments of '" + name + "'");
    NodePtr second = parseExpr();
    expect(')', "to close call to '" + name + "'");
    return makeNode(kind, first, second);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

double evaluateNode(const Expression::Node& node, double x, double y,
                    bool with_y) {
  switch (node.kind) {
    case NodeKind::number:
      return node.value;
    case NodeKind::var_x:
      return x;
    case NodeKind::var_y:
      if (!with_y) {
        throw std::domain_error(
            "variable 'y' is not available on a one-dimensional mesh");
      }
      return y;
    case NodeKind::negate:
      return -evaluateNode(*node.lhs, x, y, with_y);
    case NodeKind::add:
      return evaluateNode(*node.lhs, x, y, with_y) +
             evaluateNode(*node.rhs, x, y, with_y);
    case NodeKind::subtract:
      return evaluateNode(*node.lhs, x, y, with_y) -
             evaluateNode(*node.rhs, x, y, with_y);
    case NodeKind::multiply:
      return evaluateNode(*node.lhs, x, y, with_y) *
             evaluateNode(*node.rhs, x, y, with_y);
    case NodeKind::divide:
      return evaluateNode(*node.lhs, x, y, with_y) /
             evaluateNode(*node.rhs, x, y, with_y);
    case NodeKind::call_sin:
      return std::sin(evaluateNode(*node.lhs, x, y, with_y));
    case NodeKind::call_cos:
      return std::cos(evaluateNode(*node.lhs, x, y, with_y));
    case NodeKind::call_exp:
      return std::exp(evaluateNode(*node.lhs, x, y, with_y));
    case NodeKind::call_min:
      return std::min(evaluateNode(*node.lhs, x, y, with_y),
                      evaluateNode(*node.rhs, x, y, with_y));
    case NodeKind::call_max:
      return std::max(evaluateNode(*node.lhs, x, y, with_y),
                      evaluateNode(*node.rhs, x, y, with_y));
  }
  throw std::logic_error("unreachable expression node kind");
}

}  // namespace

Expression::Expression(std::shared_ptr<const Node> root, std::string text)
    : root_(std::move(root)), text_(std::move(text)) {}

Expression Expression::parse(const std::string& text) {
  Parser parser(text);
  return Expression(parser.run(), text);
}

double Expression::evaluate(double x, double y, bool with_y) const {
  return evaluateNode(*root_, x, y, with_y);
}

}  // namespace dpeigen
