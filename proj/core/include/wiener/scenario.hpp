#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wiener/operators.hpp"

namespace wiener {

/// A problem description read from JSON.
///
/// Recognised keys (defaults in brackets; keys marked * are required, L and
/// nx only for the heat equation):
///  *equation        "heat" | "ode"
///  *noise           "time-white" | "space-white" | "space-time" | "single-gaussian"
///  *sigma           noise amplitude >= 0
///   m_order         derivative order of the noise operator 0..2      [0]
///   a2, a0          A = a2 d^2/dx^2 + a0 (heat) or A = a0 (ode)      [1, 0]
///  *L, nx           periodic domain length and grid size (heat)
///  *T, nt           horizon and number of time steps
///  *chaos_order     N
///  *chaos_modes     K (total number of noise modes used)
///   time_modes      time modes for space-time noise; divides K       [1]
///  *u0              "gaussian-bump" | "constant" | "custom-grid"
///   u0_value, u0_width, u0_values                                    [1, 1, -]
///   weights         "constant" | "derived"                           [derived]
///   weight_value    q for constant weights                           [2]
///   r_exponent      exponent r of the reported weighted norm         [-2.5]
///   seed            seed for C_k estimation and Monte Carlo          [0]
///   output_stride   time stride of coeffs.csv                        [max(1, nt/64)]
///   mc_paths, mc_steps   Monte Carlo paths and Euler steps           [0, nt]
///   h_norm, h_coords     direction for the u_h check                 [0.3 e_1]
struct ScenarioConfig {
  std::string equation = "heat";
  std::string noise = "time-white";
  double sigma = 1.0;
  unsigned m_order = 0;
  double a2 = 1.0;
  double a0 = 0.0;
  double length = 6.283185307179586;
  std::size_t nx = 32;
  double horizon = 1.0;
  std::size_t nt = 256;
  unsigned chaos_order = 4;
  unsigned chaos_modes = 4;
  unsigned time_modes = 1;
  std::string u0 = "gaussian-bump";
  double u0_value = 1.0;
  double u0_width = 1.0;
  std::vector<double> u0_values;
  std::string weights = "derived";
  double weight_value = 2.0;
  double r_exponent = -2.5;
  std::uint64_t seed = 0;
  std::size_t output_stride = 0;
  std::size_t mc_paths = 0;
  std::size_t mc_steps = 0;
  double h_norm = 0.3;
  std::vector<double> h_coords;

  /// Stride actually used for coefficient output.
  [[nodiscard]] std::size_t effective_stride() const;
  /// Range and consistency checks; errors name the offending key.
  void validate() const;
};

/// Parse JSON text; unknown keys and type mismatches raise ValidationError.
ScenarioConfig parse_scenario(std::string_view json_text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Initial value on the grid (heat) or as a scalar (ode).
std::vector<Complex> initial_grid_values(const ScenarioConfig& config);

/// Build the evolution problem; the truncation box is (chaos_order, chaos_modes).
std::shared_ptr<EvolutionProblem> build_problem(const ScenarioConfig& config);

/// Weight sequence for the reported norms: constant weights, or nullopt for derived.
std::optional<WeightSequence> configured_weights(const ScenarioConfig& config);

/// Direction h for the u_h check.
DirectionH configured_direction(const ScenarioConfig& config);

}  // namespace wiener
