#pragma once

// Flat JSON run configuration. Every key is declared per subcommand with a
// type, a range rule and a default; unknown keys are rejected.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rfq/model.hpp"

namespace rfq::cli {

using json = nlohmann::json;

enum class Subcommand { airy_check, free, well, osc, residual, evolve, mc, mc_vs_pde, wigner_map };

struct SubcommandName {
  Subcommand cmd;
  std::string_view name;
};

inline constexpr SubcommandName kSubcommands[] = {
    {Subcommand::airy_check, "airy-check"}, {Subcommand::free, "free"},
    {Subcommand::well, "well"},             {Subcommand::osc, "osc"},
    {Subcommand::residual, "residual"},     {Subcommand::evolve, "evolve"},
    {Subcommand::mc, "mc"},                 {Subcommand::mc_vs_pde, "mc-vs-pde"},
    {Subcommand::wigner_map, "wigner-map"},
};

inline std::optional<Subcommand> subcommand_from(std::string_view s) {
  for (const auto& e : kSubcommands)
    if (e.name == s) return e.cmd;
  return std::nullopt;
}

inline std::string_view subcommand_name(Subcommand c) {
  for (const auto& e : kSubcommands)
    if (e.cmd == c) return e.name;
  return "?";
}

enum class Kind { number, integer, boolean, string, number_list };
enum class Rule { any, positive, nonnegative, grid_count, count, odd_grid_count };

struct KeySpec {
  const char* name;
  Kind kind;
  Rule rule;
  json fallback;
};

namespace detail {

inline std::vector<KeySpec> common_keys() {
  return {{"subcommand", Kind::string, Rule::any, ""},
          {"K", Kind::number, Rule::any, 1.0},
          {"lambda", Kind::number, Rule::any, 1.0},
          {"m", Kind::number, Rule::any, 1.0},
          {"q", Kind::number, Rule::any, 1.0},
          {"seed", Kind::integer, Rule::nonnegative, 1},
          {"out", Kind::string, Rule::any, "out"}};
}

inline std::vector<KeySpec> free_grid_keys(int n) {
  return {{"beta_max", Kind::number, Rule::positive, 3.0},
          {"n_beta", Kind::integer, Rule::odd_grid_count, 121},
          {"sigma", Kind::number, Rule::positive, 0.4},
          {"x_min", Kind::number, Rule::any, -2.0},
          {"x_max", Kind::number, Rule::any, 2.0},
          {"nx", Kind::integer, Rule::grid_count, n},
          {"p_min", Kind::number, Rule::any, -1.0},
          {"p_max", Kind::number, Rule::any, 1.0},
          {"np", Kind::integer, Rule::grid_count, n}};
}

inline std::vector<KeySpec> evolve_keys() {
  return {{"D", Kind::number, Rule::any, 0.0},
          {"x_min", Kind::number, Rule::any, -8.0},
          {"x_max", Kind::number, Rule::any, 8.0},
          {"nx", Kind::integer, Rule::grid_count, 161},
          {"p_min", Kind::number, Rule::any, -6.0},
          {"p_max", Kind::number, Rule::any, 6.0},
          {"np", Kind::integer, Rule::grid_count, 121},
          {"dt_pde", Kind::number, Rule::nonnegative, 0.0},
          {"T", Kind::number, Rule::nonnegative, 1.0},
          {"n_times", Kind::integer, Rule::count, 4},
          {"x0", Kind::number, Rule::any, 0.0},
          {"p0", Kind::number, Rule::any, 0.0},
          {"sigma_x0", Kind::number, Rule::positive, 0.4},
          {"sigma_p0", Kind::number, Rule::positive, 0.3}};
}

inline std::vector<KeySpec> mc_keys(double sigma_x0, double sigma_p0) {
  return {{"D", Kind::number, Rule::any, 0.0},
          {"dt", Kind::number, Rule::positive, 1e-3},
          {"T", Kind::number, Rule::nonnegative, 1.0},
          {"n_times", Kind::integer, Rule::count, 4},
          {"n_paths", Kind::integer, Rule::count, 10000},
          {"x0", Kind::number, Rule::any, 0.0},
          {"p0", Kind::number, Rule::any, 0.0},
          {"sigma_x0", Kind::number, Rule::nonnegative, sigma_x0},
          {"sigma_p0", Kind::number, Rule::nonnegative, sigma_p0}};
}

inline void merge(std::vector<KeySpec>& into, std::vector<KeySpec> more) {
  for (auto& k : more) {
    auto it = std::find_if(into.begin(), into.end(),
                           [&](const KeySpec& e) { return std::string_view(e.name) == k.name; });
    if (it == into.end()) into.push_back(std::move(k));
  }
}

}  // namespace detail

/// Keys accepted by a subcommand, common keys first.
inline std::vector<KeySpec> key_specs(Subcommand cmd) {
  auto keys = detail::common_keys();
  switch (cmd) {
    case Subcommand::airy_check:
      detail::merge(keys, {{"betas", Kind::number_list, Rule::any, json::array({0.5, 1.0, 2.0, 4.0})},
                           {"p_span", Kind::number, Rule::positive, 2.0},
                           {"tol", Kind::number, Rule::positive, 1e-6},
                           {"quad_points", Kind::integer, Rule::count, 256},
                           {"lattice_points", Kind::integer, Rule::count, 100}});
      break;
    case Subcommand::free:
      detail::merge(keys, detail::free_grid_keys(64));
      break;
    case Subcommand::residual:
      detail::merge(keys, detail::free_grid_keys(128));
      break;
    case Subcommand::well:
      detail::merge(keys, {{"a", Kind::number, Rule::positive, pi},
                           {"n_trunc", Kind::integer, Rule::count, 4},
                           {"n_levels", Kind::integer, Rule::count, 8},
                           {"nx", Kind::integer, Rule::odd_grid_count, 65},
                           {"np", Kind::integer, Rule::grid_count, 121},
                           {"p_min", Kind::number, Rule::any, -3.0},
                           {"p_max", Kind::number, Rule::any, 3.0},
                           {"include_zero", Kind::boolean, Rule::any, false},
                           {"n_sets", Kind::integer, Rule::count, 1}});
      break;
    case Subcommand::osc:
      detail::merge(keys, {{"D", Kind::number, Rule::any, 1.0},
                           {"n_levels", Kind::integer, Rule::count, 8},
                           {"n_patch", Kind::integer, Rule::grid_count, 64},
                           {"l_min", Kind::number, Rule::any, 0.5},
                           {"l_max", Kind::number, Rule::any, 1.5},
                           {"k_min", Kind::number, Rule::any, -0.5},
                           {"k_max", Kind::number, Rule::any, 0.5}});
      break;
    case Subcommand::evolve:
      detail::merge(keys, detail::evolve_keys());
      break;
    case Subcommand::mc:
      detail::merge(keys, detail::mc_keys(0.0, 0.0));
      break;
    case Subcommand::mc_vs_pde:
      detail::merge(keys, detail::evolve_keys());
      detail::merge(keys, detail::mc_keys(0.4, 0.3));
      break;
    case Subcommand::wigner_map:
      detail::merge(keys, {{"omega", Kind::number, Rule::positive, 1.0}});
      break;
  }
  return keys;
}

class RunConfig {
 public:
  RunConfig(Subcommand cmd, json values, ModelParams params)
      : cmd_(cmd), values_(std::move(values)), params_(params) {}

  Subcommand subcommand() const noexcept { return cmd_; }
  const ModelParams& params() const noexcept { return params_; }
  const json& resolved() const noexcept { return values_; }

  double num(const char* key) const { return values_.at(key).get<double>(); }
  long long integer(const char* key) const { return values_.at(key).get<long long>(); }
  std::uint64_t seed() const { return values_.at("seed").get<std::uint64_t>(); }
  bool flag(const char* key) const { return values_.at(key).get<bool>(); }
  std::string str(const char* key) const { return values_.at(key).get<std::string>(); }
  std::vector<double> numbers(const char* key) const {
    return values_.at(key).get<std::vector<double>>();
  }
  std::string out_dir() const { return str("out"); }

 private:
  Subcommand cmd_;
  json values_;
  ModelParams params_;
};

/// "--n-trunc" / "n-trunc" -> "n_trunc"
inline std::string normalize_key(std::string_view flag) {
  while (!flag.empty() && flag.front() == '-') flag.remove_prefix(1);
  std::string k(flag);
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

/// Flag text to JSON: numbers, booleans, arrays and null parse as JSON, anything else is a string.
inline json override_value(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) return json(text);
  return v;
}

namespace detail {

[[noreturn]] inline void invalid(const std::string& key, const std::string& why) {
  fail(ErrorCode::ValidationError, key + ": " + why, key);
}

inline json check_value(const KeySpec& spec, const json& v) {
  const std::string key = spec.name;
  auto finite_number = [&](const json& x) {
    if (!x.is_number()) invalid(key, "expected a number");
    const double d = x.get<double>();
    if (!std::isfinite(d)) invalid(key, "must be finite");
    return d;
  };
  switch (spec.kind) {
    case Kind::string:
      if (!v.is_string()) invalid(key, "expected a string");
      return v;
    case Kind::boolean:
      if (!v.is_boolean()) invalid(key, "expected true or false");
      return v;
    case Kind::number_list: {
      if (!v.is_array() || v.empty()) invalid(key, "expected a non-empty array of numbers");
      for (const auto& x : v) finite_number(x);
      return v;
    }
    case Kind::number: {
      const double d = finite_number(v);
      if (spec.rule == Rule::positive && !(d > 0.0)) invalid(key, "must be > 0");
      if (spec.rule == Rule::nonnegative && !(d >= 0.0)) invalid(key, "must be >= 0");
      return json(d);
    }
    case Kind::integer: {
      if (!v.is_number()) invalid(key, "expected an integer");
      if (v.is_number_unsigned() && v.get<std::uint64_t>() > (1ull << 53)) {
        if (spec.rule != Rule::nonnegative) invalid(key, "integer too large");
        return v;
      }
      const double d = v.get<double>();
      if (!std::isfinite(d) || std::floor(d) != d || std::abs(d) > 9.0e15)
        invalid(key, "expected an integer");
      const auto i = static_cast<long long>(d);
      if (spec.rule == Rule::nonnegative && i < 0) invalid(key, "must be >= 0");
      if (spec.rule == Rule::count && i < 1) invalid(key, "must be >= 1");
      if (spec.rule == Rule::grid_count && i < 8) invalid(key, "must be >= 8");
      if (spec.rule == Rule::odd_grid_count && (i < 9 || i % 2 == 0))
        invalid(key, "must be an odd count >= 9");
      if (spec.rule == Rule::nonnegative) return json(static_cast<std::uint64_t>(i));
      return json(i);
    }
  }
  return v;
}

}  // namespace detail

/// Builds a validated RunConfig. `file_bytes` is the optional JSON document;
/// `overrides` are (flag, text) pairs applied after the file in order.
inline RunConfig parse_config(std::optional<std::string_view> subcommand,
                              std::optional<std::string_view> file_bytes,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  json doc = json::object();
  if (file_bytes) {
    try {
      doc = json::parse(file_bytes->begin(), file_bytes->end());
    } catch (const json::parse_error& e) {
      fail(ErrorCode::ParseError, e.what(), "byte " + std::to_string(e.byte));
    }
    if (!doc.is_object()) fail(ErrorCode::ParseError, "configuration must be a JSON object", "byte 1");
  }
  for (const auto& [flag, text] : overrides) doc[normalize_key(flag)] = override_value(text);

  std::string name;
  if (subcommand) name = std::string(*subcommand);
  if (doc.contains("subcommand")) {
    if (!doc["subcommand"].is_string()) detail::invalid("subcommand", "expected a string");
    const auto from_doc = doc["subcommand"].get<std::string>();
    if (!name.empty() && name != from_doc)
      detail::invalid("subcommand", "file says '" + from_doc + "' but '" + name + "' was requested");
    name = from_doc;
  }
  if (name.empty()) detail::invalid("subcommand", "missing");
  const auto cmd = subcommand_from(name);
  if (!cmd) detail::invalid("subcommand", "unknown subcommand '" + name + "'");

  const auto specs = key_specs(*cmd);
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (std::none_of(specs.begin(), specs.end(),
                     [&](const KeySpec& s) { return key == s.name; }))
      detail::invalid(key, "unknown key for '" + name + "'");
  }
  json resolved = json::object();
  for (const auto& s : specs) {
    const json& v = doc.contains(s.name) ? doc[s.name] : s.fallback;
    resolved[s.name] = detail::check_value(s, v);
  }
  resolved["subcommand"] = name;

  auto grid_range = [&](const char* lo, const char* hi) {
    if (resolved.contains(lo) && resolved.contains(hi) &&
        !(resolved[lo].get<double>() < resolved[hi].get<double>()))
      detail::invalid(lo, std::string("must be < ") + hi);
  };
  grid_range("x_min", "x_max");
  grid_range("p_min", "p_max");
  grid_range("l_min", "l_max");
  grid_range("k_min", "k_max");

  try {
    const auto params = make_params(resolved["K"].get<double>(), resolved["lambda"].get<double>(),
                                    resolved["m"].get<double>(), resolved["q"].get<double>());
    return RunConfig(*cmd, std::move(resolved), params);
  } catch (const Error& e) {
    fail(ErrorCode::ValidationError, e.message(), e.context());
  }
}

}  // namespace rfq::cli
