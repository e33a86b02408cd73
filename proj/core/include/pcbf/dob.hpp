// Disturbance observer d_hat_i = s_i + alpha_i z_i and the low-pass chain
// that turns d_hat_i into estimates with known time derivatives.
//
// Levels are 1-based in the math and 0-based in every container here:
// index i holds level i+1, and filtered[i][j] holds stage j+1 of level i+1.
#pragma once

#include <cstddef>
#include <vector>

namespace pcbf {

struct DobSpec {
  std::vector<double> alpha;  // observer gain per level
  std::vector<double> nu;     // analysis constant per level, 0 < nu < 2 alpha
  // time_constants[i] has n - (i+1) entries for levels 1..n-1; the last
  // level has no filter chain.
  std::vector<std::vector<double>> time_constants;

  std::size_t levels() const noexcept { return alpha.size(); }
  /// kappa_i = alpha_i - nu_i / 2 for 0-based level i.
  double kappa(std::size_t i) const { return alpha.at(i) - nu.at(i) / 2.0; }
  /// Throws SpecError on non-positive gains, nu outside (0, 2 alpha) or a
  /// malformed filter table.
  void validate() const;
  bool operator==(const DobSpec&) const = default;
};

using Block = std::vector<double>;

struct DobChainState {
  std::vector<Block> s;                      // internal states
  std::vector<Block> estimate;               // d_hat_i, always s_i + alpha_i z_i
  std::vector<std::vector<Block>> filtered;  // d_hat^f_{i,j}, j >= 1

  /// d_hat^f_{i,j} with j = 0 meaning the raw estimate.
  const Block& stage(std::size_t i, std::size_t j) const { return j == 0 ? estimate.at(i) : filtered.at(i).at(j - 1); }
};

/// s_i(0) = -alpha_i z_i(0) so every estimate starts at zero; filters start
/// at zero as well. `z` holds z_1..z_n.
DobChainState initial_dob_state(const DobSpec& spec, const std::vector<Block>& z);

/// Recomputes every d_hat_i from s_i and z_i.
void refresh_estimates(const DobSpec& spec, DobChainState& state, const std::vector<Block>& z);

/// ds_i/dt = -alpha_i (drive_i + d_hat_i) where drive_i = f_i + g_i z_{i+1}
/// for i < n and f_n + g_n u for the last level.
std::vector<Block> dob_derivative(const DobSpec& spec, const DobChainState& state, const std::vector<Block>& drive);

/// d/dt d_hat^f_{i,j} = -T_{i,j} (d_hat^f_{i,j} - d_hat^f_{i,j-1}).
std::vector<std::vector<Block>> filter_derivative(const DobSpec& spec, const DobChainState& state);

}  // namespace pcbf
