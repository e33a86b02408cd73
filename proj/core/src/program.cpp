#include "pcbf/program.hpp"

#include <bit>
#include <cmath>
#include <unordered_map>

namespace pcbf {

namespace {

struct Key {
  Op op;
  std::uint32_t a;
  std::uint32_t b;
  std::uint64_t bits;
  bool operator==(const Key&) const = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept {
    std::size_t h = static_cast<std::size_t>(k.op);
    h = h * 1000003u ^ k.a;
    h = h * 1000003u ^ k.b;
    h = h * 1000003u ^ static_cast<std::size_t>(k.bits ^ (k.bits >> 29));
    return h;
  }
};

std::string abbreviate(std::string s) {
  constexpr std::size_t kMax = 160;
  if (s.size() > kMax) s = s.substr(0, kMax) + "...";
  return s;
}

}  // namespace

Program::Program(std::span<const Expr> outputs, std::vector<std::string> inputs)
    : inputs_(std::move(inputs)) {
  std::unordered_map<std::string, std::uint32_t> input_index;
  for (std::uint32_t i = 0; i < inputs_.size(); ++i) input_index.emplace(inputs_[i], i);

  std::unordered_map<Key, std::uint32_t, KeyHash> interned;
  std::unordered_map<const ExprNode*, std::uint32_t> visited;

  auto emit = [&](const Expr& source, Key key) -> std::uint32_t {
    if (auto it = interned.find(key); it != interned.end()) return it->second;
    const auto slot = static_cast<std::uint32_t>(code_.size());
    code_.push_back(Instr{key.op, key.a, key.b, std::bit_cast<double>(key.bits)});
    sources_.push_back(source);
    interned.emplace(key, slot);
    return slot;
  };

  // Iterative post-order walk; expression DAGs can be deep.
  auto compile = [&](const Expr& root) -> std::uint32_t {
    std::vector<std::pair<Expr, bool>> stack{{root, false}};
    while (!stack.empty()) {
      auto [node, expanded] = stack.back();
      stack.pop_back();
      if (visited.count(node.id())) continue;
      const std::size_t n = arity(node.op());
      if (!expanded && n > 0) {
        stack.emplace_back(node, true);
        if (n == 2) stack.emplace_back(node.rhs(), false);
        stack.emplace_back(node.lhs(), false);
        continue;
      }
      Key key{node.op(), 0, 0, 0};
      switch (node.op()) {
        case Op::Constant:
          key.bits = std::bit_cast<std::uint64_t>(node.value());
          break;
        case Op::Variable: {
          auto it = input_index.find(node.name());
          if (it == input_index.end()) throw UnboundVariable(node.name());
          key.a = it->second;
          break;
        }
        default:
          key.a = visited.at(node.lhs().id());
          if (n == 2) key.b = visited.at(node.rhs().id());
          break;
      }
      visited.emplace(node.id(), emit(node, key));
    }
    return visited.at(root.id());
  };

  outputs_.reserve(outputs.size());
  for (const Expr& e : outputs) outputs_.push_back(compile(e));
}

void Program::domain_failure(std::size_t index) const {
  throw DomainError("domain error", abbreviate(to_string(sources_[index])));
}

void Program::evaluate(std::span<const double> in, std::span<double> out,
                       std::vector<double>& scratch) const {
  if (in.size() != inputs_.size()) throw SpecError("Program::evaluate: wrong input count");
  if (out.size() != outputs_.size()) throw SpecError("Program::evaluate: wrong output count");
  scratch.resize(code_.size());
  double* r = scratch.data();
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Instr& ins = code_[i];
    double v;
    switch (ins.op) {
      case Op::Constant: v = ins.value; break;
      case Op::Variable: v = in[ins.a]; break;
      case Op::Neg: v = -r[ins.a]; break;
      case Op::Add: v = r[ins.a] + r[ins.b]; break;
      case Op::Sub: v = r[ins.a] - r[ins.b]; break;
      case Op::Mul: v = r[ins.a] * r[ins.b]; break;
      case Op::Div:
        if (r[ins.b] == 0.0) domain_failure(i);
        v = r[ins.a] / r[ins.b];
        break;
      case Op::Sin: v = std::sin(r[ins.a]); break;
      case Op::Cos: v = std::cos(r[ins.a]); break;
      case Op::Exp: v = std::exp(r[ins.a]); break;
      default:
        if (domain_violation(ins.op, r[ins.a], r[ins.b])) domain_failure(i);
        v = apply_numeric(ins.op, r[ins.a], r[ins.b]);
        break;
    }
    r[i] = v;
  }
  for (std::size_t k = 0; k < outputs_.size(); ++k) out[k] = r[outputs_[k]];
}

std::vector<double> Program::operator()(std::span<const double> in) const {
  std::vector<double> out(outputs_.size());
  std::vector<double> scratch;
  evaluate(in, out, scratch);
  return out;
}

}  // namespace pcbf
