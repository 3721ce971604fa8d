#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

namespace dpeigen {

// Thrown when expression text cannot be parsed. position() is the 1-based
// character offset of the offending token in the original text.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

// A parsed arithmetic expression over the spatial variables x and y.
//
// Grammar (EBNF):
//
//   expr    = term { ("+" | "-") term } ;
//   term    = unary { ("*" | "/") unary } ;
//   unary   = [ "+" | "-" ] primary ;
//   primary = number | "x" | "y" | call | "(" expr ")" ;
//   call    = ( "sin" | "cos" | "exp" ) "(" expr ")"
//           | ( "min" | "max" ) "(" expr "," expr ")" ;
//   number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//
// There are no user-defined names: anything outside the grammar is rejected
// with a ParseError carrying the character position. Evaluation is a pure
// function of the point, so sampling the same expression twice produces
// bit-identical values.
class Expression {
public:
  // Opaque parse-tree node; defined in the implementation file.
  struct Node;

  // Parses `text` or throws ParseError.
  static Expression parse(const std::string& text);

  // Evaluates at (x, y). `with_y` states whether the y variable is in scope;
  // it is not on one-dimensional meshes, and referencing y without it throws
  // std::domain_error.
  double evaluate(double x, double y, bool with_y) const;

  const std::string& text() const noexcept { return text_; }

private:
  Expression(std::shared_ptr<const Node> root, std::string text);

  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace dpeigen
