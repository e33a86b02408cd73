#include "pcbf/dob.hpp"

#include "pcbf/error.hpp"

namespace pcbf {

void DobSpec::validate() const {
  const std::size_t n = levels();
  if (n == 0) throw SpecError("dob: at least one level is required");
  if (nu.size() != n) throw SpecError("dob: need one nu per level");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(alpha[i] > 0.0)) throw SpecError("dob: alpha must be positive");
    if (!(nu[i] > 0.0 && nu[i] < 2.0 * alpha[i])) throw SpecError("dob: nu must lie in (0, 2 alpha)");
  }
  if (time_constants.size() != n - 1) throw SpecError("dob: need a filter row for each of levels 1..n-1");
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (time_constants[i].size() != n - (i + 1)) {
      throw SpecError("dob: level " + std::to_string(i + 1) + " needs " + std::to_string(n - i - 1) +
                      " filter time constants");
    }
    for (double t : time_constants[i])
      if (!(t > 0.0)) throw SpecError("dob: filter time constants must be positive");
  }
}

DobChainState initial_dob_state(const DobSpec& spec, const std::vector<Block>& z) {
  if (z.size() != spec.levels()) throw SpecError("dob: state has wrong number of levels");
  DobChainState st;
  for (std::size_t i = 0; i < z.size(); ++i) {
    Block s(z[i].size());
    for (std::size_t c = 0; c < s.size(); ++c) s[c] = -spec.alpha[i] * z[i][c];
    st.s.push_back(std::move(s));
    st.estimate.emplace_back(z[i].size(), 0.0);
    std::vector<Block> chain;
    if (i + 1 < z.size()) chain.assign(spec.time_constants[i].size(), Block(z[i].size(), 0.0));
    st.filtered.push_back(std::move(chain));
  }
  refresh_estimates(spec, st, z);
  return st;
}

void refresh_estimates(const DobSpec& spec, DobChainState& state, const std::vector<Block>& z) {
  state.estimate.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    Block& d = state.estimate[i];
    d.resize(z[i].size());
    for (std::size_t c = 0; c < d.size(); ++c) d[c] = state.s[i][c] + spec.alpha[i] * z[i][c];
  }
}

std::vector<Block> dob_derivative(const DobSpec& spec, const DobChainState& state, const std::vector<Block>& drive) {
  if (drive.size() != state.s.size()) throw SpecError("dob: drive has wrong number of levels");
  std::vector<Block> out(drive.size());
  for (std::size_t i = 0; i < drive.size(); ++i) {
    if (drive[i].size() != state.estimate[i].size()) throw SpecError("dob: drive block has wrong dimension");
    out[i].resize(drive[i].size());
    for (std::size_t c = 0; c < drive[i].size(); ++c) {
      out[i][c] = -spec.alpha[i] * (drive[i][c] + state.estimate[i][c]);
    }
  }
  return out;
}

std::vector<std::vector<Block>> filter_derivative(const DobSpec& spec, const DobChainState& state) {
  std::vector<std::vector<Block>> out(state.filtered.size());
  for (std::size_t i = 0; i < state.filtered.size(); ++i) {
    for (std::size_t j = 1; j <= state.filtered[i].size(); ++j) {
      const Block& cur = state.stage(i, j);
      const Block& prev = state.stage(i, j - 1);
      const double t = spec.time_constants[i][j - 1];
      Block d(cur.size());
      for (std::size_t c = 0; c < cur.size(); ++c) d[c] = -t * (cur[c] - prev[c]);
      out[i].push_back(std::move(d));
    }
  }
  return out;
}

}  // namespace pcbf
