#include "pcbf/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace pcbf {

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind = Tok::End;
  std::size_t offset = 0;
  std::string_view text;
  double number = 0.0;
};

std::string describe(Tok t) {
  switch (t) {
    case Tok::Number: return "number";
    case Tok::Ident: return "identifier";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Caret: return "'^'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::End: return "end of input";
  }
  return "?";
}

const std::vector<std::string>& operand_start() {
  static const std::vector<std::string> v = {"number", "identifier", "'('", "'-'", "'+'"};
  return v;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      Token t;
      t.offset = pos_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        out.push_back(number());
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          ++pos_;
        }
        t.kind = Tok::Ident;
        t.text = src_.substr(start, pos_ - start);
        out.push_back(t);
        continue;
      }
      switch (c) {
        case '+': t.kind = Tok::Plus; break;
        case '-': t.kind = Tok::Minus; break;
        case '*': t.kind = Tok::Star; break;
        case '/': t.kind = Tok::Slash; break;
        case '^': t.kind = Tok::Caret; break;
        case '(': t.kind = Tok::LParen; break;
        case ')': t.kind = Tok::RParen; break;
        case ',': t.kind = Tok::Comma; break;
        default:
          throw ParseError(std::string("unexpected character '") + c + "'", pos_, operand_start());
      }
      t.text = src_.substr(pos_, 1);
      ++pos_;
      out.push_back(t);
    }
  }

 private:
  Token number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    Token t;
    t.kind = Tok::Number;
    t.offset = start;
    t.text = src_.substr(start, pos_ - start);
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, t.number);
    if (ec != std::errc() || ptr != last || !std::isfinite(t.number)) {
      throw ParseError("malformed number '" + std::string(t.text) + "'", start, {"number"});
    }
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Expr parse_all() {
    Expr e = sum();
    if (peek().kind != Tok::End) {
      fail("unexpected " + describe(peek().kind), {"operator", "end of input"});
    }
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
    throw ParseError(msg, peek().offset, std::move(expected));
  }

  void expect(Tok kind, std::vector<std::string> expected) {
    if (peek().kind != kind) fail("unexpected " + describe(peek().kind), std::move(expected));
    ++pos_;
  }

  Expr sum() {
    Expr lhs = product();
    for (;;) {
      if (peek().kind == Tok::Plus) {
        ++pos_;
        lhs = Expr::make(Op::Add, lhs, product());
      } else if (peek().kind == Tok::Minus) {
        ++pos_;
        lhs = Expr::make(Op::Sub, lhs, product());
      } else {
        return lhs;
      }
    }
  }

  Expr product() {
    Expr lhs = unary();
    for (;;) {
      if (peek().kind == Tok::Star) {
        ++pos_;
        lhs = Expr::make(Op::Mul, lhs, unary());
      } else if (peek().kind == Tok::Slash) {
        ++pos_;
        lhs = Expr::make(Op::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (peek().kind == Tok::Minus) {
      ++pos_;
      return Expr::make(Op::Neg, unary());
    }
    if (peek().kind == Tok::Plus) {
      ++pos_;
      return unary();
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (peek().kind == Tok::Caret) {
      ++pos_;
      return Expr::make(Op::Pow, base, unary());
    }
    return base;
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number:
        ++pos_;
        return Expr::constant(t.number);
      case Tok::LParen: {
        ++pos_;
        Expr inner = sum();
        expect(Tok::RParen, {"')'", "operator"});
        return inner;
      }
      case Tok::Ident:
        return identifier();
      default:
        fail("unexpected " + describe(t.kind), operand_start());
    }
  }

  Expr identifier() {
    const Token& t = next();
    if (peek().kind != Tok::LParen) {
      if (t.text == "pi") return Expr::constant(std::numbers::pi);
      return Expr::variable(t.text);
    }
    const std::size_t name_offset = t.offset;
    const std::string name(t.text);
    ++pos_;  // '('
    std::vector<Expr> args;
    if (peek().kind == Tok::RParen) {
      fail("function '" + name + "' needs arguments", operand_start());
    }
    args.push_back(sum());
    while (peek().kind == Tok::Comma) {
      ++pos_;
      args.push_back(sum());
    }
    expect(Tok::RParen, {"')'", "','", "operator"});

    static const std::vector<std::pair<std::string_view, Op>> unary_functions = {
        {"sin", Op::Sin}, {"cos", Op::Cos},   {"tan", Op::Tan},   {"exp", Op::Exp},
        {"log", Op::Log}, {"sqrt", Op::Sqrt}, {"tanh", Op::Tanh},
    };
    for (const auto& [fname, op] : unary_functions) {
      if (name == fname) {
        if (args.size() != 1) {
          throw ParseError("function '" + name + "' takes 1 argument", name_offset, {});
        }
        return Expr::make(op, args[0]);
      }
    }
    if (name == "pow") {
      if (args.size() != 2) throw ParseError("function 'pow' takes 2 arguments", name_offset, {});
      return Expr::make(Op::Pow, args[0], args[1]);
    }
    throw ParseError("unknown function '" + name + "'", name_offset,
                     {"sin", "cos", "tan", "exp", "log", "sqrt", "tanh", "pow"});
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view source) {
  Lexer lexer(source);
  Parser parser(lexer.run());
  return parser.parse_all();
}

}  // namespace pcbf
