#pragma once

// Run configuration, read from a single JSON document:
//
//   {
//     "group": "heisenberg3",            // or "twostep6", "threestep5", "abelian(r)"
//     "S": 8, "c": 3,                    // torus samples; grid samples per unit (q = c*S)
//     "j_half": 1,                       // fiber box [-j_half, j_half]^r
//     "gamma1_radius": 1,
//     "generators": [{"type": "random", "seed": 7}],
//     "orthonormalize": false,           // replace the generator by its orthonormalized version
//     "tolerances": {"pf_eps": 1e-9, "rank_rel_tol": 1e-9},
//     "seed": 1,
//     "mode": "frame",                   // frame | riesz | bessel
//     "output": "report.json",
//     "csv": "bounds.csv"                // optional
//   }
//
// Generator types: "gaussian-rank-one" {center, width}, "indicator-rank-one"
// {box_u, box_v} (lists of [lo, hi) per axis), "random" {seed},
// "bandlimited-random" {seed}, "bspline" {order}, "file" {path}.

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sis/error.hpp"
#include "sis/generator.hpp"
#include "sis/range.hpp"
#include "sis/transform.hpp"

namespace sis {

struct RunConfig {
  std::string group = "heisenberg3";
  int S = 4;
  int c = 1;
  int j_half = 1;
  int gamma1_radius = 1;
  std::vector<GeneratorSpec> generators;
  bool orthonormalize = false;
  double pf_eps = default_pf_eps;
  double rank_rel_tol = default_rank_rel_tol;
  std::uint64_t seed = 1;
  BoundsMode mode = BoundsMode::frame;
  std::string output;
  std::string csv;

  int q() const { return c * S; }
};

namespace detail {

template <typename T>
T get(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw InputError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(where + ": bad value for '" + key + "': " + e.what());
  }
}

inline void only_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                      const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw InputError(where + ": unknown key '" + it.key() + "'");
}

inline std::vector<std::pair<double, double>> parse_box(const nlohmann::json& j,
                                                        const std::string& where) {
  std::vector<std::pair<double, double>> box;
  if (!j.is_array()) throw InputError(where + ": box must be a list of [lo, hi] pairs");
  for (const auto& iv : j) {
    if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number())
      throw InputError(where + ": box must be a list of [lo, hi] pairs");
    box.emplace_back(iv[0].get<double>(), iv[1].get<double>());
  }
  return box;
}

}  // namespace detail

inline GeneratorSpec parse_generator(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("generator entry must be an object");
  const auto type = detail::get<std::string>(j, "type", "generator");
  const std::string where = "generator '" + type + "'";
  if (type == "gaussian-rank-one") {
    detail::only_keys(j, {"type", "center", "width"}, where);
    return GaussianRankOne{detail::get<std::vector<double>>(j, "center", where),
                           detail::get<double>(j, "width", where)};
  }
  if (type == "indicator-rank-one") {
    detail::only_keys(j, {"type", "box_u", "box_v"}, where);
    if (!j.contains("box_u") || !j.contains("box_v")) throw InputError(where + ": needs box_u and box_v");
    return IndicatorRankOne{detail::parse_box(j["box_u"], where), detail::parse_box(j["box_v"], where)};
  }
  if (type == "random") {
    detail::only_keys(j, {"type", "seed"}, where);
    return RandomGenerator{detail::get<std::uint64_t>(j, "seed", where)};
  }
  if (type == "bandlimited-random") {
    detail::only_keys(j, {"type", "seed"}, where);
    return BandlimitedRandom{detail::get<std::uint64_t>(j, "seed", where)};
  }
  if (type == "bspline") {
    detail::only_keys(j, {"type", "order"}, where);
    return BSplineGenerator{detail::get<int>(j, "order", where)};
  }
  if (type == "file") {
    detail::only_keys(j, {"type", "path"}, where);
    return FileGenerator{detail::get<std::string>(j, "path", where)};
  }
  throw InputError("unknown generator type '" + type + "'");
}

inline RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  detail::only_keys(j,
                    {"group", "S", "c", "j_half", "gamma1_radius", "generators", "orthonormalize",
                     "tolerances", "seed", "mode", "output", "csv"},
                    "config");
  RunConfig cfg;
  const std::string where = "config";
  cfg.group = detail::get<std::string>(j, "group", where);
  cfg.S = detail::get<int>(j, "S", where);
  cfg.c = detail::get<int>(j, "c", where);
  cfg.j_half = detail::get<int>(j, "j_half", where);
  cfg.gamma1_radius = detail::get<int>(j, "gamma1_radius", where);
  if (j.contains("orthonormalize")) cfg.orthonormalize = detail::get<bool>(j, "orthonormalize", where);
  if (j.contains("seed")) cfg.seed = detail::get<std::uint64_t>(j, "seed", where);
  if (j.contains("mode")) cfg.mode = parse_mode(detail::get<std::string>(j, "mode", where));
  if (j.contains("output")) cfg.output = detail::get<std::string>(j, "output", where);
  if (j.contains("csv")) cfg.csv = detail::get<std::string>(j, "csv", where);
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    if (!t.is_object()) throw InputError("config: tolerances must be an object");
    detail::only_keys(t, {"pf_eps", "rank_rel_tol"}, "tolerances");
    if (t.contains("pf_eps")) cfg.pf_eps = detail::get<double>(t, "pf_eps", "tolerances");
    if (t.contains("rank_rel_tol")) cfg.rank_rel_tol = detail::get<double>(t, "rank_rel_tol", "tolerances");
  }
  if (j.contains("generators")) {
    if (!j["generators"].is_array()) throw InputError("config: generators must be a list");
    for (const auto& g : j["generators"]) cfg.generators.push_back(parse_generator(g));
  }

  preset(cfg.group);  // validates the name
  if (cfg.S < 2) throw InputError("config: S must be >= 2");
  if (cfg.c < 1) throw InputError("config: c must be >= 1");
  if (cfg.j_half < 1) throw InputError("config: j_half must be >= 1");
  if (cfg.gamma1_radius < 0) throw InputError("config: gamma1_radius must be >= 0");
  if (!(cfg.pf_eps > 0) || !(cfg.rank_rel_tol > 0))
    throw InputError("config: tolerances must be positive");
  if (cfg.generators.empty()) throw InputError("config: at least one generator is required");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

inline LayoutPtr make_layout(const RunConfig& cfg) {
  const auto g = preset(cfg.group);
  return make_layout(g, cfg.S, FiberIndexSet::symmetric(g.r, cfg.j_half), cfg.q(), cfg.pf_eps);
}

}  // namespace sis
