// Random points for controller expressions, kept inside the barrier
// Lyapunov domain |z1 - mu1| < rho(t).
#pragma once

#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "numeric.hpp"
#include "pcbf/barrier.hpp"

namespace pcbf::testing {

struct SamplerRanges {
  std::map<std::string, std::pair<double, double>> state;  // per plant/proxy state name
  std::pair<double, double> virtual_states{-2.0, 2.0};      // mu*, nu*
  std::pair<double, double> estimates{-2.0, 2.0};           // dhat*
  std::pair<double, double> time{0.0, 3.0};
  std::pair<double, double> fallback{-2.0, 2.0};
  double funnel_fraction = 0.6;  // |e| <= fraction * rho(t)
};

/// Sampler over `inputs`. When both "z1" and "mu1" are inputs, z1 is placed
/// within the funnel around mu1.
inline std::function<std::vector<double>(std::mt19937_64&)> make_sampler(std::vector<std::string> inputs,
                                                                          SamplerRanges ranges, RhoSpec rho) {
  return [inputs = std::move(inputs), ranges = std::move(ranges), rho](std::mt19937_64& rng) {
    std::vector<double> v(inputs.size());
    std::size_t z1 = inputs.size(), mu1 = inputs.size(), t = inputs.size();
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const std::string& n = inputs[i];
      std::pair<double, double> r = ranges.fallback;
      if (auto it = ranges.state.find(n); it != ranges.state.end()) r = it->second;
      else if (n == "t") r = ranges.time, t = i;
      else if (n.rfind("mu", 0) == 0 || n.rfind("nu", 0) == 0) r = ranges.virtual_states;
      else if (n.rfind("dhat", 0) == 0) r = ranges.estimates;
      v[i] = uniform(rng, r.first, r.second);
      if (n == "z1") z1 = i;
      if (n == "mu1") mu1 = i;
    }
    if (z1 < inputs.size() && mu1 < inputs.size()) {
      const double time = t < inputs.size() ? v[t] : 0.0;
      v[z1] = v[mu1] + uniform(rng, -ranges.funnel_fraction, ranges.funnel_fraction) * rho(time);
    }
    return v;
  };
}

}  // namespace pcbf::testing
