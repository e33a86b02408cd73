// Strict-feedback plant
//
//   dx/dt   = f0(x) + g0(x) z_1
//   dz_i/dt = f_i(x, z_1..z_i) + g_i(x, z_1..z_i) z_{i+1} + d_i(t),   i < n
//   dz_n/dt = f_n(x, z_1..z_n) + g_n(x, z_1..z_n) u + d_n(t)
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pcbf/expr_linalg.hpp"
#include "pcbf/program.hpp"

namespace pcbf {

struct PlantSpec {
  std::vector<std::string> x_names;
  std::vector<std::vector<std::string>> z_names;  // z_1..z_n
  std::size_t input_dim = 1;                      // q
  ExprVec f0;
  ExprMat g0;                         // p x p_1
  std::vector<ExprVec> f;             // f_1..f_n
  std::vector<ExprMat> g;             // g_i is p_i x p_{i+1}, g_n is p_n x q
  std::vector<ExprVec> disturbance;   // d_1..d_n over t; an empty block means none
  std::vector<double> omega;          // declared bounds on |d_i'|, informational

  std::size_t levels() const noexcept { return z_names.size(); }
  std::size_t x_dim() const noexcept { return x_names.size(); }
  std::size_t block_dim(std::size_t i) const { return z_names.at(i).size(); }  // 0-based level
  std::size_t state_dim() const;
  /// x names followed by every z block in order.
  std::vector<std::string> state_names() const;
  bool disturbed() const;
  /// Dimensions, strict-feedback dependency structure, disturbances in t only.
  void validate() const;
};

/// Numeric evaluation of a PlantSpec.
class PlantModel {
 public:
  PlantModel() = default;
  explicit PlantModel(PlantSpec spec);

  const PlantSpec& spec() const noexcept { return spec_; }

  struct Terms {
    std::vector<double> f0;
    std::vector<double> g0;                 // row-major p x p_1
    std::vector<std::vector<double>> f;     // per level
    std::vector<std::vector<double>> g;     // per level, row-major
    std::vector<std::vector<double>> d;     // per level, zero when undisturbed
  };

  /// `state` is x followed by z_1..z_n.
  Terms terms(std::span<const double> state, double t) const;

  /// Known part of each level: f_i + g_i z_{i+1} (or g_n u); excludes d_i.
  std::vector<std::vector<double>> drive(const Terms& terms, std::span<const double> state,
                                         std::span<const double> u) const;

  /// Full state derivative including disturbances.
  std::vector<double> derivative(std::span<const double> state, std::span<const double> u, double t) const;
  std::vector<double> derivative(const Terms& terms, std::span<const double> state, std::span<const double> u) const;

  /// Offset of block z_i (0-based level) inside the state vector.
  std::size_t offset(std::size_t level) const { return offsets_.at(level); }

 private:
  PlantSpec spec_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> f_slots_, g_slots_, d_slots_;
  std::size_t g0_slot_ = 0;
  Program program_;
};

/// y = M v for a row-major rows x cols matrix.
std::vector<double> mat_vec(std::span<const double> m, std::size_t rows, std::size_t cols, std::span<const double> v);

}  // namespace pcbf
