#include "wiener/scenario.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "wiener/error.hpp"

namespace wiener {

namespace {

using nlohmann::json;

[[noreturn]] void fail(std::string_view key, std::string_view what) {
  throw ValidationError(std::string(key) + ": " + std::string(what));
}

double get_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) fail(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(key, "must be finite");
  return x;
}

std::uint64_t get_unsigned(const json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) fail(key, "must be non-negative");
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x >= 0.0 && x == std::floor(x) && x < 1.8e19) return static_cast<std::uint64_t>(x);
  }
  fail(key, "expected a non-negative integer");
}

std::string get_string(const json& j, const char* key, std::string fallback, std::initializer_list<const char*> allowed) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) fail(key, "expected a string");
  std::string s = v.get<std::string>();
  for (const char* a : allowed) {
    if (s == a) return s;
  }
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  fail(key, "unknown value \"" + s + "\" (expected one of " + list + ")");
}

std::vector<double> get_numbers(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  const json& v = j.at(key);
  if (!v.is_array()) fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) fail(key, "expected an array of numbers");
    out.push_back(x.get<double>());
    if (!std::isfinite(out.back())) fail(key, "entries must be finite");
  }
  return out;
}

unsigned narrow(std::uint64_t v, const char* key) {
  if (v > 1000000) fail(key, "value too large");
  return static_cast<unsigned>(v);
}

}  // namespace

std::size_t ScenarioConfig::effective_stride() const {
  return output_stride != 0 ? output_stride : std::max<std::size_t>(1, nt / 64);
}

void ScenarioConfig::validate() const {
  if (!(sigma >= 0.0)) fail("sigma", "must be >= 0");
  if (m_order > 2) fail("m_order", "must be 0, 1 or 2");
  if (equation == "ode" && m_order != 0) fail("m_order", "must be 0 for equation \"ode\"");
  if (equation == "ode" && (noise == "space-white" || noise == "space-time")) {
    fail("noise", "spatial noise needs equation \"heat\"");
  }
  if (a2 < 0.0) fail("a2", "must be >= 0");
  if (!(length > 0.0)) fail("L", "must be positive");
  if (equation == "heat" && nx < 2) fail("nx", "must be at least 2");
  if (!(horizon > 0.0)) fail("T", "must be positive");
  if (nt == 0) fail("nt", "must be positive");
  if (chaos_modes == 0) fail("chaos_modes", "must be positive");
  if (noise == "single-gaussian" && chaos_modes != 1) fail("chaos_modes", "must be 1 for single-gaussian noise");
  if (noise == "space-time") {
    if (time_modes == 0 || chaos_modes % time_modes != 0) fail("time_modes", "must divide chaos_modes");
  }
  if (noise != "space-time" && time_modes != 1) fail("time_modes", "only applies to space-time noise");
  if (u0 == "gaussian-bump" && !(u0_width > 0.0)) fail("u0_width", "must be positive");
  if (u0 == "custom-grid") {
    const std::size_t expected = equation == "heat" ? nx : 1;
    if (u0_values.size() != expected) {
      fail("u0_values", "needs " + std::to_string(expected) + " entries for u0 \"custom-grid\"");
    }
  }
  if (weights == "constant" && !(weight_value >= 1.0)) fail("weight_value", "must be >= 1");
  if (mc_steps != 0 && mc_steps % nt != 0) fail("mc_steps", "must be a multiple of nt");
  if (mc_paths == 1) fail("mc_paths", "must be 0 or at least 2");
}

ScenarioConfig parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  static const std::set<std::string> known{
      "equation",   "noise",       "sigma",      "m_order",   "a2",        "a0",        "L",        "nx",
      "T",          "nt",          "chaos_order", "chaos_modes", "time_modes", "u0",      "u0_value", "u0_width",
      "u0_values",  "weights",     "weight_value", "r_exponent", "seed",     "output_stride", "mc_paths",
      "mc_steps",   "h_norm",      "h_coords"};
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) fail(item.key(), "unknown key");
  }
  for (const char* key : {"equation", "noise", "sigma", "T", "nt", "chaos_order", "chaos_modes", "u0"}) {
    if (!j.contains(key)) fail(key, "required key is missing");
  }
  if (j.at("equation") == "heat") {
    for (const char* key : {"L", "nx"}) {
      if (!j.contains(key)) fail(key, "required key is missing for equation \"heat\"");
    }
  }
  ScenarioConfig c;
  c.equation = get_string(j, "equation", c.equation, {"heat", "ode"});
  c.noise = get_string(j, "noise", c.noise, {"time-white", "space-white", "space-time", "single-gaussian"});
  c.sigma = get_number(j, "sigma", c.sigma);
  c.m_order = narrow(get_unsigned(j, "m_order", c.m_order), "m_order");
  c.a2 = get_number(j, "a2", c.a2);
  c.a0 = get_number(j, "a0", c.a0);
  c.length = get_number(j, "L", c.length);
  c.nx = get_unsigned(j, "nx", c.nx);
  c.horizon = get_number(j, "T", c.horizon);
  c.nt = get_unsigned(j, "nt", c.nt);
  c.chaos_order = narrow(get_unsigned(j, "chaos_order", c.chaos_order), "chaos_order");
  c.chaos_modes = narrow(get_unsigned(j, "chaos_modes", c.chaos_modes), "chaos_modes");
  c.time_modes = narrow(get_unsigned(j, "time_modes", c.time_modes), "time_modes");
  c.u0 = get_string(j, "u0", c.u0, {"gaussian-bump", "constant", "custom-grid"});
  c.u0_value = get_number(j, "u0_value", c.u0_value);
  c.u0_width = get_number(j, "u0_width", c.u0_width);
  c.u0_values = get_numbers(j, "u0_values");
  c.weights = get_string(j, "weights", c.weights, {"constant", "derived"});
  c.weight_value = get_number(j, "weight_value", c.weight_value);
  c.r_exponent = get_number(j, "r_exponent", c.r_exponent);
  c.seed = get_unsigned(j, "seed", c.seed);
  c.output_stride = get_unsigned(j, "output_stride", c.output_stride);
  c.mc_paths = get_unsigned(j, "mc_paths", c.mc_paths);
  c.mc_steps = get_unsigned(j, "mc_steps", c.mc_steps);
  c.h_norm = get_number(j, "h_norm", c.h_norm);
  c.h_coords = get_numbers(j, "h_coords");
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

std::vector<Complex> initial_grid_values(const ScenarioConfig& c) {
  if (c.equation == "ode") {
    return {Complex(c.u0 == "custom-grid" ? c.u0_values.front() : c.u0_value)};
  }
  std::vector<Complex> u(c.nx);
  for (std::size_t l = 0; l < c.nx; ++l) {
    const double x = c.length * static_cast<double>(l) / static_cast<double>(c.nx);
    if (c.u0 == "constant") {
      u[l] = c.u0_value;
    } else if (c.u0 == "custom-grid") {
      u[l] = c.u0_values[l];
    } else {
      const double z = (x - 0.5 * c.length) / c.u0_width;
      u[l] = c.u0_value * std::exp(-z * z);
    }
  }
  return u;
}

std::shared_ptr<EvolutionProblem> build_problem(const ScenarioConfig& c) {
  c.validate();
  const bool heat = c.equation == "heat";
  CoefficientSpace space = heat ? CoefficientSpace::fourier_modes(c.nx, c.length) : CoefficientSpace::scalar();
  OperatorFamily a = OperatorFamily::multiplier(space, heat ? Symbol{c.a2, 0.0, c.a0} : Symbol{0.0, 0.0, c.a0});

  NoiseModel noise = NoiseModel::single_variable();
  if (c.noise == "time-white") {
    noise = NoiseModel::time_white(c.horizon, c.chaos_modes);
  } else if (c.noise == "space-white") {
    noise = NoiseModel::space_white(space, c.chaos_modes);
  } else if (c.noise == "space-time") {
    noise = NoiseModel::space_time(c.horizon, space, c.time_modes, c.chaos_modes / c.time_modes);
  }
  NoiseOperatorFamily m = NoiseOperatorFamily::derivative(std::move(noise), space, c.sigma, c.m_order);

  const TruncationBox box{c.chaos_order, c.chaos_modes};
  const auto grid = initial_grid_values(c);
  Vector init = heat ? grid_to_fourier(grid) : Vector::Constant(1, grid.front());
  ChaosSeries u0 = ChaosSeries::deterministic(space, box, {init.data(), static_cast<std::size_t>(init.size())});

  auto problem = std::make_shared<EvolutionProblem>(EvolutionProblem{
      std::move(space), std::move(a), std::move(m), std::move(u0), {}, c.horizon, c.nt, box});
  problem->validate();
  return problem;
}

std::optional<WeightSequence> configured_weights(const ScenarioConfig& c) {
  if (c.weights == "constant") return WeightSequence::constant(c.weight_value);
  return std::nullopt;
}

DirectionH configured_direction(const ScenarioConfig& c) {
  if (!c.h_coords.empty()) return {c.h_coords};
  return {{c.h_norm}};
}

}  // namespace wiener
