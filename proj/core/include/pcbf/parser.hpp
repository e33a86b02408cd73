// Infix expression parser.
//
// Grammar (lowest to highest binding):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | identifier | identifier '(' sum (',' sum)* ')' | '(' sum ')'
//
// Functions: sin cos tan exp log sqrt tanh pow(base, exponent).
// The identifier `pi` denotes the constant.
#pragma once

#include <string_view>

#include "pcbf/expr.hpp"

namespace pcbf {

/// Parses `source` verbatim (no rewriting); throws ParseError carrying the
/// byte offset of the failure and the set of tokens that would have been
/// accepted there.
Expr parse(std::string_view source);

}  // namespace pcbf
