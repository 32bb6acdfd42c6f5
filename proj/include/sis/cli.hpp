#pragma once

// Subcommands behind the sisfiber tool. Each returns its report and exit code
// instead of printing, so tests can drive them directly.
//
// Exit codes: 0 pass, 1 check failure, 2 usage/config error,
// 3 mathematical degeneracy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sis/action.hpp"
#include "sis/config.hpp"
#include "sis/error.hpp"
#include "sis/generator.hpp"
#include "sis/oracle.hpp"
#include "sis/range.hpp"
#include "sis/sizf.hpp"
#include "sis/transform.hpp"

namespace sis::cli {

using nlohmann::json;

enum ExitCode : int { ok = 0, check_failed = 1, usage_error = 2, degenerate = 3 };

struct CommandResult {
  int exit_code = ok;
  json report;
  std::string csv;  // empty unless the command produces one
};

/// Tolerances the verification checks are held to.
struct VerifyTolerances {
  static constexpr double parseval = 1e-12;
  static constexpr double unitarity = 1e-12;
  static constexpr double composition = 1e-10;
  static constexpr double sumid = 1e-9;
  static constexpr double equality_lemma = 1e-9;
  static constexpr double trig_parseval = 1e-12;
  static constexpr double spectrum = 1e-6;
  static constexpr double homomorphism = 1e-10;
};

inline json layout_json(const Layout& l) {
  return {{"group", l.group().name()},
          {"r", l.r()},
          {"d", l.group().d},
          {"S", l.S()},
          {"q", l.space().samples()},
          {"j_min", l.box().j_min},
          {"j_max", l.box().j_max},
          {"active_slots", l.active_count()},
          {"slots", l.n_slots()}};
}

/// Everything a command needs, built from a config.
struct Model {
  RunConfig cfg;
  LayoutPtr layout;
  std::vector<OperatorField> raw;  // Fourier-side inputs
  TranslateSystem system;
};

inline Model build_model(const RunConfig& cfg) {
  Model m;
  m.cfg = cfg;
  m.layout = make_layout(cfg);
  if (m.layout->active_count() == 0)
    throw InputError("degenerate input: pf_eps=" + std::to_string(cfg.pf_eps) +
                     " masks every slot, the model is empty");
  std::vector<FiberField> gens;
  for (const auto& spec : cfg.generators) {
    m.raw.push_back(build_generator(spec, m.layout));
    gens.push_back(t_transform(m.raw.back()));
  }
  m.system = make_system(std::move(gens), cfg.gamma1_radius);
  if (cfg.orthonormalize) m.system = orthonormalize_fibers(m.system, cfg.rank_rel_tol);
  return m;
}

inline json metadata_json(const Model& m) {
  return {{"layout", layout_json(*m.layout)},
          {"gamma1_radius", m.cfg.gamma1_radius},
          {"gamma1_size", m.system.gamma1.size()},
          {"generators", m.system.n_generators()},
          {"orthonormalized", m.cfg.orthonormalize},
          {"mode", to_string(m.cfg.mode)},
          {"tolerances", {{"pf_eps", m.cfg.pf_eps}, {"rank_rel_tol", m.cfg.rank_rel_tol}}},
          {"seed", m.cfg.seed}};
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

/// Runs fn, mapping library errors to exit codes.
template <typename Fn>
CommandResult guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const DegenerateError& e) {
    return {degenerate, json{{"error", e.what()}, {"kind", "degenerate"}}, {}};
  } catch (const InputError& e) {
    return {usage_error, json{{"error", e.what()}, {"kind", "input"}}, {}};
  } catch (const nlohmann::json::exception& e) {
    return {usage_error, json{{"error", e.what()}, {"kind", "input"}}, {}};
  }
}

inline CommandResult cmd_bounds(const RunConfig& cfg) {
  return guarded([&] {
    const Model m = build_model(cfg);
    const auto rep = essential_bounds(m.system, cfg.mode, cfg.rank_rel_tol);
    json per = json::array();
    std::ostringstream csv;
    csv.imbue(std::locale::classic());
    for (int a = 0; a < m.layout->r(); ++a) csv << "sigma" << a << ",";
    csv << "A,B,rank\n";
    for (const auto& ps : rep.per_sigma) {
      json e{{"sigma", ps.sigma},
             {"B", ps.bounds.B},
             {"rank", ps.bounds.rank},
             {"eigenvalues", ps.bounds.eigenvalues}};
      e["A"] = ps.bounds.A ? json(*ps.bounds.A) : json(nullptr);
      per.push_back(e);
      for (double v : ps.sigma) csv << format_double(v) << ",";
      csv << (ps.bounds.A ? format_double(*ps.bounds.A) : std::string()) << ","
          << format_double(ps.bounds.B) << "," << ps.bounds.rank << "\n";
    }
    json global{{"B", rep.B}};
    global["A"] = rep.A ? json(*rep.A) : json(nullptr);
    json report{{"command", "bounds"},
                {"metadata", metadata_json(m)},
                {"per_sigma", per},
                {"global", global}};
    return CommandResult{ok, report, csv.str()};
  });
}

namespace detail {

inline json check(const std::string& name, double lhs, double rhs, double err, double tol,
                  const std::string& err_kind = "rel") {
  return {{"check", name},
          {"lhs", lhs},
          {"rhs", rhs},
          {err_kind == "rel" ? "rel_err" : "abs_err", err},
          {"tolerance", tol},
          {"pass", err <= tol}};
}

inline json skipped(const std::string& name, const std::string& why) {
  return {{"check", name}, {"skipped", why}, {"pass", true}};
}

inline LatticePoint random_lattice_point(std::mt19937_64& rng, const TranslateSystem& sys) {
  std::uniform_int_distribution<std::size_t> pick(0, sys.gamma1.size() - 1);
  std::uniform_int_distribution<int> pick_m(0, sys.layout->S() - 1);
  LatticePoint p{sys.gamma1[pick(rng)], std::vector<int>(static_cast<std::size_t>(sys.layout->r()))};
  for (auto& v : p.m) v = pick_m(rng);
  return p;
}

inline Coefficients random_coefficients(std::mt19937_64& rng, const TranslateSystem& sys,
                                        std::size_t count) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_phi(0, sys.n_generators() - 1);
  Coefficients c;
  for (std::size_t i = 0; i < count; ++i) {
    const auto p = random_lattice_point(rng, sys);
    const double re = gauss(rng);
    const double im = gauss(rng);
    c[{pick_phi(rng), p.k, p.m}] = {re, im};
  }
  return c;
}

/// Lattice product of (k, m) points through the group law, central part
/// reduced mod S.
inline LatticePoint lattice_product(const GroupSpec& spec, int S, const LatticePoint& a,
                                    const LatticePoint& b) {
  const auto ab = multiply(spec, to_element(a), to_element(b));
  LatticePoint p;
  for (double v : ab.x) p.k.push_back(static_cast<int>(std::lround(v)));
  for (double v : ab.z) {
    long m = std::lround(v) % S;
    if (m < 0) m += S;
    p.m.push_back(static_cast<int>(m));
  }
  return p;
}

}  // namespace detail

inline CommandResult cmd_verify(const RunConfig& cfg) {
  return guarded([&] {
    const Model m = build_model(cfg);
    const Layout& l = *m.layout;
    const auto& sys = m.system;
    std::mt19937_64 rng(cfg.seed);
    json checks = json::array();

    // Parseval chain for every raw generator
    for (std::size_t g = 0; g < m.raw.size(); ++g) {
      const double a = field_norm(weight(m.raw[g]));
      const double b = fiber_norm(t_transform(m.raw[g]));
      checks.push_back(detail::check("parseval_chain[" + std::to_string(g) + "]", a, b, rel_err(a, b),
                                     VerifyTolerances::parseval));
      const double c = field_norm(m.raw[g]);
      checks.push_back(detail::check("t_isometry[" + std::to_string(g) + "]", c, b, rel_err(c, b),
                                     VerifyTolerances::parseval));
    }

    // translates preserve norms
    {
      double worst = 0.0, lhs = 0.0, rhs = 0.0;
      for (int t = 0; t < 4; ++t) {
        const auto p = detail::random_lattice_point(rng, sys);
        const auto& phi = sys.generators[static_cast<std::size_t>(t) % sys.n_generators()];
        const double a = fiber_norm(translate(phi, p));
        const double b = fiber_norm(phi);
        if (rel_err(a, b) >= worst) {
          worst = rel_err(a, b);
          lhs = a;
          rhs = b;
        }
      }
      checks.push_back(detail::check("intertwining_unitarity", lhs, rhs, worst, VerifyTolerances::unitarity));
    }

    // composition law through the group product
    if (l.group().has_group_law()) {
      double worst = 0.0;
      for (int t = 0; t < 3; ++t) {
        const auto a = detail::random_lattice_point(rng, sys);
        const auto b = detail::random_lattice_point(rng, sys);
        const auto& phi = sys.generators.front();
        const auto twice = translate(translate(phi, b), a);
        const auto once = translate(phi, detail::lattice_product(l.group(), l.S(), a, b));
        FiberField diff = twice;
        axpy(-1.0, once, diff);
        worst = std::max(worst, fiber_norm(diff) / std::max(fiber_norm(phi), 1e-300));
      }
      checks.push_back(detail::check("composition_law", 0.0, worst, worst, VerifyTolerances::composition, "abs"));
    } else {
      checks.push_back(detail::skipped("composition_law", "no group law for " + l.group().name()));
    }

    // coefficient-sum identity on a random f
    {
      const auto f = t_transform(build_generator(RandomGenerator{cfg.seed ^ 0x5eedULL}, m.layout));
      const auto r = sumid_check(f, sys);
      checks.push_back(detail::check("sumid", r.direct, r.fiber, r.rel_err, VerifyTolerances::sumid));
    }

    // equality lemma and trigonometric Parseval
    {
      const auto coeffs = detail::random_coefficients(rng, sys, 6);
      const auto r = equality_lemma_check(coeffs, sys);
      checks.push_back(detail::check("equality_lemma", r.lhs, r.rhs, r.rel_err, VerifyTolerances::equality_lemma));
      checks.push_back(detail::check("trig_parseval", r.coeff_energy, r.poly_energy, r.parseval_rel_err,
                                     VerifyTolerances::trig_parseval));
    }

    // oracle translate Gram spectrum against the union of fiber spectra
    if (sys.n_fiber_vectors() * l.n_sigma() <= translate_gram_limit) {
      const auto tg = hermitian_eigenvalues(translate_gram(sys));
      const auto rep = essential_bounds(sys, BoundsMode::bessel, cfg.rank_rel_tol);
      double lo = rep.per_sigma.front().bounds.eigenvalues.back();
      for (const auto& ps : rep.per_sigma) lo = std::min(lo, ps.bounds.eigenvalues.back());
      checks.push_back(detail::check("translate_gram_min", tg.back(), lo, std::abs(tg.back() - lo),
                                     VerifyTolerances::spectrum, "abs"));
      checks.push_back(detail::check("translate_gram_max", tg.front(), rep.B, std::abs(tg.front() - rep.B),
                                     VerifyTolerances::spectrum, "abs"));
    } else {
      checks.push_back(detail::skipped("translate_gram", "system exceeds the desk-scale limit"));
    }

    // projective homomorphism on lattice elements
    if (l.group().has_group_law()) {
      double worst = 0.0;
      for (int t = 0; t < 4; ++t) {
        const auto a = detail::random_lattice_point(rng, sys);
        const auto b = detail::random_lattice_point(rng, sys);
        std::uniform_int_distribution<std::size_t> pick_s(0, l.n_sigma() - 1), pick_j(0, l.n_fiber() - 1);
        const auto s = pick_s(rng);
        const auto j = pick_j(rng);
        const auto res = homomorphism_check(l.group(), l.space(), l.lambda(s, j), to_element(a), to_element(b));
        worst = std::max(worst, res.defect);
      }
      checks.push_back(detail::check("homomorphism", 0.0, worst, worst, VerifyTolerances::homomorphism, "abs"));
    } else {
      checks.push_back(detail::skipped("homomorphism", "no group law for " + l.group().name()));
    }

    bool all = true;
    std::string failed;
    for (const auto& c : checks)
      if (!c["pass"].get<bool>()) {
        all = false;
        failed += (failed.empty() ? "" : ", ") + c["check"].get<std::string>();
      }
    json report{{"command", "verify"}, {"metadata", metadata_json(m)}, {"checks", checks}, {"pass", all}};
    if (!all) report["failed"] = failed;
    return CommandResult{all ? ok : check_failed, report, {}};
  });
}

/// <f, L_(k,m) phi> for f = the first generator and every phi, k, m.
inline CommandResult cmd_coeffs(const RunConfig& cfg) {
  return guarded([&] {
    const Model m = build_model(cfg);
    const auto& f = m.system.generators.front();
    const auto keys = translate_index(m.system);
    std::vector<cplx> vals(keys.size());
    parallel_for(keys.size(), [&](std::size_t i) {
      vals[i] = analysis_coefficient(f, m.system.generators[keys[i].phi], {keys[i].k, keys[i].m});
    });
    json rows = json::array();
    std::ostringstream csv;
    csv.imbue(std::locale::classic());
    csv << "phi,k,m,re,im\n";
    for (std::size_t i = 0; i < keys.size(); ++i) {
      rows.push_back({{"phi", keys[i].phi}, {"k", keys[i].k}, {"m", keys[i].m},
                      {"re", vals[i].real()}, {"im", vals[i].imag()}});
      auto join = [](const std::vector<int>& v) {
        std::string s;
        for (int x : v) s += (s.empty() ? "" : " ") + std::to_string(x);
        return s;
      };
      csv << keys[i].phi << "," << join(keys[i].k) << "," << join(keys[i].m) << ","
          << format_double(vals[i].real()) << "," << format_double(vals[i].imag()) << "\n";
    }
    json report{{"command", "coeffs"}, {"metadata", metadata_json(m)}, {"coefficients", rows}};
    return CommandResult{ok, report, csv.str()};
  });
}

inline CommandResult demo_sis_not_left_invariant(const RunConfig& cfg) {
  const Model m = build_model(cfg);
  const Layout& l = *m.layout;
  if (l.space().per_unit() % 2 != 0)
    throw InputError("sis_not_left_invariant demo needs an even number of samples per unit (c)");
  const auto& sys = m.system;
  const auto& phi = sys.generators.front();

  // lattice translates stay in the space
  double lattice_residual = 0.0;
  std::mt19937_64 rng(cfg.seed);
  for (int t = 0; t < 3; ++t) {
    const auto p = detail::random_lattice_point(rng, sys);
    lattice_residual = std::max(lattice_residual, membership_residual(translate(phi, p), sys, cfg.rank_rel_tol).max);
  }

  // the half translation exp(X1/2 + X2/2) does not
  GroupElement half = identity(l.group());
  half.x[0] = 0.5;
  half.x[1] = 0.5;
  FiberField moved = FiberField::zeros(m.layout);
  double max_fiber = 0.0;
  for (std::size_t s = 0; s < l.n_sigma(); ++s) {
    max_fiber = std::max(max_fiber, std::sqrt(fiber_norm_sq(l, phi.fibers[s])));
    for (std::size_t j = 0; j < l.n_fiber(); ++j)
      if (l.active(s, j))
        moved.fibers[s].slots[j] = rep_action(l.group(), l.space(), l.lambda(s, j), half).apply(phi.fibers[s].slots[j]);
  }
  const double half_residual = membership_residual(moved, sys, cfg.rank_rel_tol).max;
  const double lattice_tol = 1e-9;
  const double half_threshold = 1e-6 * max_fiber;
  const bool pass = lattice_residual <= lattice_tol && half_residual >= half_threshold;
  json report{{"command", "demo"},
              {"demo", "sis_not_left_invariant"},
              {"metadata", metadata_json(m)},
              {"lattice_residual", {{"value", lattice_residual}, {"tolerance", lattice_tol}}},
              {"half_shift_residual", {{"value", half_residual}, {"threshold", half_threshold}}},
              {"max_fiber_norm", max_fiber},
              {"pass", pass}};
  return {pass ? ok : check_failed, report, {}};
}

inline CommandResult demo_bandlimited_onb(RunConfig cfg) {
  bool bandlimited = false;
  for (const auto& g : cfg.generators) bandlimited = bandlimited || std::holds_alternative<BandlimitedRandom>(g);
  if (!bandlimited) cfg.generators = {BandlimitedRandom{cfg.seed}};
  cfg.generators.resize(1);
  cfg.orthonormalize = true;
  const Model m = build_model(cfg);
  const Layout& l = *m.layout;
  const auto& phi = m.system.generators.front();

  double outside = 0.0;
  for (std::size_t s = 0; s < l.n_sigma(); ++s)
    for (std::size_t j = 0; j < l.n_fiber(); ++j)
      if (!sis::detail::in_band(l.j(j))) outside = std::max(outside, phi.fibers[s].slots[j].norm());

  const auto g = translate_gram(m.system);
  const double dev = (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
  const double tol = 1e-8;
  const bool pass = dev <= tol && outside == 0.0;
  json report{{"command", "demo"},
              {"demo", "bandlimited_onb"},
              {"metadata", metadata_json(m)},
              {"gram_deviation", {{"value", dev}, {"tolerance", tol}}},
              {"translates", g.rows()},
              {"max_outside_band", outside},
              {"pass", pass}};
  return {pass ? ok : check_failed, report, {}};
}

inline CommandResult cmd_demo(const RunConfig& cfg, const std::string& name) {
  return guarded([&]() -> CommandResult {
    const auto group = preset(cfg.group);
    if (name == "sis_not_left_invariant") {
      if (group.kind != GroupKind::twostep6)
        throw InputError("demo sis_not_left_invariant runs on twostep6, config has " + group.name());
      return demo_sis_not_left_invariant(cfg);
    }
    if (name == "bandlimited_onb") {
      if (group.kind != GroupKind::heisenberg3)
        throw InputError("demo bandlimited_onb runs on heisenberg3, config has " + group.name());
      return demo_bandlimited_onb(cfg);
    }
    throw InputError("unknown demo '" + name + "'");
  });
}

/// Writes the first generator's Fourier-side field as SIZF1.
inline CommandResult cmd_export(const RunConfig& cfg, const std::string& path) {
  return guarded([&] {
    if (path.empty()) throw InputError("export needs an output path");
    const auto layout = make_layout(cfg);
    const auto f = build_generator(cfg.generators.front(), layout);
    write_sizf(path, f);
    json report{{"command", "export"}, {"path", path}, {"layout", layout_json(*layout)},
                {"field_norm", field_norm(f)}};
    return CommandResult{ok, report, {}};
  });
}

inline CommandResult cmd_import(const RunConfig& cfg, const std::string& path) {
  return guarded([&] {
    const auto layout = make_layout(cfg);
    const auto f = read_sizf(path, layout);
    json report{{"command", "import"},
                {"path", path},
                {"layout", layout_json(*layout)},
                {"field_norm", field_norm(f)},
                {"fiber_norm", fiber_norm(t_transform(f))}};
    return CommandResult{ok, report, {}};
  });
}

}  // namespace sis::cli
