#pragma once

// Run configuration: YAML document with sections model / grid / weight /
// sweep / solver / multiplicity / offdiag / output.  Requires yaml-cpp.

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nlh/error.hpp"
#include "nlh/regime.hpp"
#include "nlh/resolvent.hpp"
#include "nlh/solver.hpp"
#include "nlh/weight.hpp"

namespace nlh {

enum class Mode { Solve, Limit, EnergyComparison, Concentration, Multiplicity, Offdiag, KernelBounds };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Solve: return "solve";
    case Mode::Limit: return "limit";
    case Mode::EnergyComparison: return "energy-comparison";
    case Mode::Concentration: return "concentration";
    case Mode::Multiplicity: return "multiplicity";
    case Mode::Offdiag: return "offdiag";
    case Mode::KernelBounds: return "kernel-bounds";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(const std::string& s) {
  for (Mode m : {Mode::Solve, Mode::Limit, Mode::EnergyComparison, Mode::Concentration, Mode::Multiplicity, Mode::Offdiag,
                 Mode::KernelBounds}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

/// Default grid spacing in units of 1/√a1.
inline constexpr double kDefaultSpacing = 0.75;
inline constexpr double kDefaultEta = 0.03;

inline int default_points(int dim) {
  switch (dim) {
    case 2: return 128;
    case 3: return 64;
    case 4: return 32;
    default: return 16;
  }
}

struct RunConfig {
  Mode mode = Mode::Solve;

  int dim = 3;
  double alpha = -1.0;
  double beta = 0.0;
  double p = 5.0;

  int points = 0;        // 0: by dimension
  bool side_auto = true;
  double side = 0.0;     // resolved value
  double eta = kDefaultEta;

  WeightSpec weight = WeightSpec::constant(1.0);

  std::vector<double> eps_list;  // resolved; k_list is converted
  bool eps_from_k = false;
  double eps = 1.0;              // single-solve modes

  double tol = 1e-7;
  int max_iter = 5000;
  SearchDirection direction = SearchDirection::ConjugateGradient;
  std::optional<std::vector<double>> seed_center;
  double seed_width = 0.0;  // 0: 1/(2√a1)

  double nu = 0.0;     // 0: 0.1·c0
  double delta = 0.0;  // 0: weight width
  double rho = 0.0;    // 0: derived from M and delta

  std::vector<double> r_list;
  double support_radius = 1.0;
  double kernel_tolerance = 0.1;

  std::string out_dir = "out";
  std::string label = "run";
  bool write_csv = true;
  bool write_binary = true;
  bool write_summary = true;

  ModelParameters params{};

  TorusGrid make_grid() const { return TorusGrid(dim, points, side); }

  SolverOptions solver_options() const {
    SolverOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    o.direction = direction;
    return o;
  }
};

namespace detail {

[[noreturn]] inline void invalid(const std::string& field, const std::string& msg) {
  fail(ErrorCode::ValidationError, field + ": " + msg);
}

inline std::string where(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  return m.line >= 0 ? " (line " + std::to_string(m.line + 1) + ")" : "";
}

inline void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) {
  if (!node) return;
  if (!node.IsMap()) invalid(section, "expected a mapping" + where(node));
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) invalid(section + "." + key, "unknown key" + where(kv.first));
  }
}

/// Absent or empty sections read as an empty mapping.
inline YAML::Node section(const YAML::Node& root, const char* key) {
  const YAML::Node n = root[key];
  return n && !n.IsNull() ? n : YAML::Node(YAML::NodeType::Map);
}

template <class T>
T get(const YAML::Node& node, const std::string& field, T fallback) {
  if (!node || node.IsNull()) return fallback;
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(ErrorCode::ParseError, field + ": cannot convert value" + where(node));
  }
}

inline std::vector<double> get_list(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) fail(ErrorCode::ParseError, field + ": expected a list" + where(node));
  return get<std::vector<double>>(node, field, {});
}

inline Bump parse_bump(const YAML::Node& n, const std::string& field) {
  check_keys(n, field, {"center", "height", "width"});
  Bump b;
  if (!n["center"]) invalid(field + ".center", "required");
  b.center = get_list(n["center"], field + ".center");
  b.height = get<double>(n["height"], field + ".height", 1.0);
  b.width = get<double>(n["width"], field + ".width", 1.0);
  return b;
}

inline WeightSpec parse_weight(const YAML::Node& n, int dim) {
  check_keys(n, "weight", {"kind", "level", "floor", "bumps", "plateau"});
  WeightSpec w;
  if (!n) return WeightSpec::constant(1.0);
  const auto kind = get<std::string>(n["kind"], "weight.kind", "constant");
  if (kind == "constant") {
    w.kind = WeightKind::Constant;
    w.level = get<double>(n["level"], "weight.level", 1.0);
  } else if (kind == "gaussian_bumps") {
    w.kind = WeightKind::GaussianBumps;
    w.floor = get<double>(n["floor"], "weight.floor", 0.0);
    const YAML::Node bumps = n["bumps"];
    if (!bumps || !bumps.IsSequence() || bumps.size() == 0) invalid("weight.bumps", "non-empty list required");
    for (std::size_t i = 0; i < bumps.size(); ++i) w.bumps.push_back(parse_bump(bumps[i], "weight.bumps[" + std::to_string(i) + "]"));
  } else if (kind == "plateau") {
    w.kind = WeightKind::Plateau;
    w.floor = get<double>(n["floor"], "weight.floor", 0.0);
    const YAML::Node pl = n["plateau"];
    check_keys(pl, "weight.plateau", {"center", "height", "radius", "taper"});
    if (!pl) invalid("weight.plateau", "required for kind plateau");
    w.plateau.center = pl["center"] ? get_list(pl["center"], "weight.plateau.center") : std::vector<double>(dim, 0.0);
    w.plateau.height = get<double>(pl["height"], "weight.plateau.height", 1.0);
    w.plateau.radius = get<double>(pl["radius"], "weight.plateau.radius", 1.0);
    w.plateau.taper = get<double>(pl["taper"], "weight.plateau.taper", 1.0);
  } else {
    invalid("weight.kind", "expected constant, gaussian_bumps or plateau, got '" + kind + "'");
  }
  try {
    w.validate(dim);
  } catch (const Error& e) {
    invalid("weight", e.what());
  }
  return w;
}

}  // namespace detail

/// Builds a validated config from a parsed YAML document.  `mode` (from the
/// command line) wins; a `mode:` key in the file must agree with it.
inline RunConfig config_from_yaml(const YAML::Node& root, std::optional<Mode> mode) {
  using namespace detail;
  if (!root || root.IsNull()) fail(ErrorCode::ParseError, "empty configuration");
  if (!root.IsMap()) fail(ErrorCode::ParseError, "top level must be a mapping" + where(root));
  check_keys(root, "config", {"mode", "model", "grid", "weight", "sweep", "solver", "multiplicity", "offdiag", "kernel", "output"});

  RunConfig c;
  if (root["mode"]) {
    const auto s = get<std::string>(root["mode"], "mode", "");
    const auto m = parse_mode(s);
    if (!m) invalid("mode", "unknown mode '" + s + "'");
    if (mode && *mode != *m) invalid("mode", "file says '" + s + "' but '" + to_string(*mode) + "' was requested");
    c.mode = *m;
  } else if (mode) {
    c.mode = *mode;
  } else {
    invalid("mode", "no mode given");
  }

  const YAML::Node model = section(root, "model");
  check_keys(model, "model", {"N", "alpha", "beta", "p"});
  c.dim = get<int>(model["N"], "model.N", 3);
  c.alpha = get<double>(model["alpha"], "model.alpha", -1.0);
  c.beta = get<double>(model["beta"], "model.beta", 0.0);
  c.p = get<double>(model["p"], "model.p", 5.0);
  try {
    c.params = ModelParameters::make(c.dim, c.alpha, c.beta, c.p);
  } catch (const Error& e) {
    invalid("model", e.what());
  }

  const YAML::Node grid = section(root, "grid");
  check_keys(grid, "grid", {"n", "L", "eta"});
  c.points = get<int>(grid["n"], "grid.n", default_points(c.dim));
  if (c.points < 4 || (c.points & (c.points - 1)) != 0) invalid("grid.n", "must be a power of two >= 4");
  const YAML::Node side = grid["L"];
  if (!side || side.IsNull() || (side.IsScalar() && side.Scalar() == "auto")) {
    c.side_auto = true;
    c.side = admissible_side(c.params.roots.a1, c.points * kDefaultSpacing / std::sqrt(c.params.roots.a1));
  } else {
    c.side_auto = false;
    c.side = get<double>(side, "grid.L", 0.0);
    if (!(c.side > 0.0)) invalid("grid.L", "must be positive or 'auto'");
  }
  c.eta = get<double>(grid["eta"], "grid.eta", kDefaultEta);
  if (!(c.eta >= 0.0)) invalid("grid.eta", "must be >= 0");
  if (c.eta > 0.0 && c.eta < kEtaFloor) invalid("grid.eta", "must be 0 or at least 1e-6");

  c.weight = parse_weight(root["weight"], c.dim);

  const YAML::Node sweep = section(root, "sweep");
  check_keys(sweep, "sweep", {"eps_list", "k_list", "eps", "k"});
  if (sweep) {
    if (sweep["eps_list"] && sweep["k_list"]) invalid("sweep", "eps_list and k_list are mutually exclusive");
    if (sweep["eps"] && sweep["k"]) invalid("sweep", "eps and k are mutually exclusive");
    if (sweep["eps_list"]) c.eps_list = get_list(sweep["eps_list"], "sweep.eps_list");
    if (sweep["k_list"]) {
      c.eps_from_k = true;
      for (double k : get_list(sweep["k_list"], "sweep.k_list")) {
        if (!(k > 0.0)) invalid("sweep.k_list", "entries must be positive");
        c.eps_list.push_back(1.0 / k);
      }
    }
    for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
      if (!(c.eps_list[i] > 0.0)) invalid("sweep", "eps values must be positive");
      if (i > 0 && !(c.eps_list[i] < c.eps_list[i - 1])) invalid("sweep", "eps values must be strictly decreasing");
    }
    if (sweep["eps"]) c.eps = get<double>(sweep["eps"], "sweep.eps", 1.0);
    if (sweep["k"]) {
      const double k = get<double>(sweep["k"], "sweep.k", 1.0);
      if (!(k > 0.0)) invalid("sweep.k", "must be positive");
      c.eps = 1.0 / k;
    }
    if (!(c.eps > 0.0)) invalid("sweep.eps", "must be positive");
  }

  const YAML::Node solver = section(root, "solver");
  check_keys(solver, "solver", {"tol", "max_iter", "direction", "seed_center", "seed_width"});
  c.tol = get<double>(solver["tol"], "solver.tol", 1e-7);
  c.max_iter = get<int>(solver["max_iter"], "solver.max_iter", 5000);
  if (!(c.tol > 0.0)) invalid("solver.tol", "must be positive");
  if (c.max_iter < 0) invalid("solver.max_iter", "must be >= 0");
  const auto dir = get<std::string>(solver["direction"], "solver.direction", "cg");
  if (dir == "cg") {
    c.direction = SearchDirection::ConjugateGradient;
  } else if (dir == "steepest") {
    c.direction = SearchDirection::Steepest;
  } else {
    invalid("solver.direction", "expected cg or steepest");
  }
  if (solver && solver["seed_center"]) {
    c.seed_center = get_list(solver["seed_center"], "solver.seed_center");
    if (static_cast<int>(c.seed_center->size()) != c.dim) invalid("solver.seed_center", "dimension differs from N");
  }
  c.seed_width = get<double>(solver["seed_width"], "solver.seed_width", default_seed_width(c.params.roots));
  if (!(c.seed_width > 0.0)) invalid("solver.seed_width", "must be positive");

  const YAML::Node mult = section(root, "multiplicity");
  check_keys(mult, "multiplicity", {"nu", "delta", "rho"});
  c.nu = get<double>(mult["nu"], "multiplicity.nu", 0.0);
  c.delta = get<double>(mult["delta"], "multiplicity.delta", 0.0);
  c.rho = get<double>(mult["rho"], "multiplicity.rho", 0.0);
  if (c.nu < 0.0 || c.delta < 0.0 || c.rho < 0.0) invalid("multiplicity", "nu, delta and rho must be >= 0 (0 = default)");

  const YAML::Node od = section(root, "offdiag");
  check_keys(od, "offdiag", {"r_list", "support_radius"});
  c.support_radius = get<double>(od["support_radius"], "offdiag.support_radius", 1.0);
  if (!(c.support_radius > 0.0)) invalid("offdiag.support_radius", "must be positive");
  if (od && od["r_list"]) {
    c.r_list = get_list(od["r_list"], "offdiag.r_list");
  } else {
    const double hi = c.side / 4.0;
    for (int i = 0; i < 8; ++i) c.r_list.push_back(2.0 * std::pow(hi / 2.0, i / 7.0));
  }

  const YAML::Node kernel = section(root, "kernel");
  check_keys(kernel, "kernel", {"tolerance"});
  c.kernel_tolerance = get<double>(kernel["tolerance"], "kernel.tolerance", 0.1);

  const YAML::Node out = section(root, "output");
  check_keys(out, "output", {"directory", "label", "formats"});
  c.out_dir = get<std::string>(out["directory"], "output.directory", "out");
  c.label = get<std::string>(out["label"], "output.label", "run");
  if (out && out["formats"]) {
    c.write_csv = c.write_binary = c.write_summary = false;
    for (const auto& f : out["formats"]) {
      const auto s = get<std::string>(f, "output.formats", "");
      if (s == "csv") {
        c.write_csv = true;
      } else if (s == "binary") {
        c.write_binary = true;
      } else if (s == "summary") {
        c.write_summary = true;
      } else {
        invalid("output.formats", "unknown format '" + s + "'");
      }
    }
  }

  // Mode-specific requirements.
  switch (c.mode) {
    case Mode::EnergyComparison:
    case Mode::Concentration:
      if (c.eps_list.empty()) invalid("sweep", "eps_list or k_list required for " + std::string(to_string(c.mode)));
      if (c.mode == Mode::Concentration && !c.weight.has_maximizer_set()) {
        invalid("weight", "concentration rejects a constant weight: the maximizer set is the whole space");
      }
      break;
    case Mode::Multiplicity:
      if (c.weight.kind != WeightKind::GaussianBumps) invalid("weight.kind", "multiplicity needs gaussian_bumps");
      break;
    case Mode::Offdiag:
      if (!(c.eta > 0.0)) invalid("grid.eta", "offdiag needs eta > 0");
      break;
    default: break;
  }
  return c;
}

inline RunConfig parse_config_string(const std::string& text, std::optional<Mode> mode = std::nullopt) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    fail(ErrorCode::ParseError, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return config_from_yaml(root, mode);
}

inline RunConfig parse_config(const std::string& path, std::optional<Mode> mode = std::nullopt) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), mode);
}

/// Fully resolved config (all defaults filled) as YAML that parses back to
/// the same RunConfig.
inline YAML::Node config_to_yaml(const RunConfig& c) {
  auto flow = [](YAML::Node n) {
    n.SetStyle(YAML::EmitterStyle::Flow);
    return n;
  };
  YAML::Node n;
  n["mode"] = to_string(c.mode);
  n["model"]["N"] = c.dim;
  n["model"]["alpha"] = c.alpha;
  n["model"]["beta"] = c.beta;
  n["model"]["p"] = c.p;
  n["grid"]["n"] = c.points;
  n["grid"]["L"] = c.side;
  n["grid"]["eta"] = c.eta;
  YAML::Node w;
  w["kind"] = to_string(c.weight.kind);
  if (c.weight.kind == WeightKind::Constant) {
    w["level"] = c.weight.level;
  } else {
    w["floor"] = c.weight.floor;
  }
  for (const auto& b : c.weight.bumps) {
    YAML::Node bn;
    bn["center"] = flow(YAML::Node(b.center));
    bn["height"] = b.height;
    bn["width"] = b.width;
    w["bumps"].push_back(bn);
  }
  if (c.weight.kind == WeightKind::Plateau) {
    w["plateau"]["center"] = flow(YAML::Node(c.weight.plateau.center));
    w["plateau"]["height"] = c.weight.plateau.height;
    w["plateau"]["radius"] = c.weight.plateau.radius;
    w["plateau"]["taper"] = c.weight.plateau.taper;
  }
  n["weight"] = w;
  if (!c.eps_list.empty()) n["sweep"]["eps_list"] = flow(YAML::Node(c.eps_list));
  n["sweep"]["eps"] = c.eps;
  n["solver"]["tol"] = c.tol;
  n["solver"]["max_iter"] = c.max_iter;
  n["solver"]["direction"] = c.direction == SearchDirection::ConjugateGradient ? "cg" : "steepest";
  if (c.seed_center) n["solver"]["seed_center"] = flow(YAML::Node(*c.seed_center));
  n["solver"]["seed_width"] = c.seed_width;
  n["multiplicity"]["nu"] = c.nu;
  n["multiplicity"]["delta"] = c.delta;
  n["multiplicity"]["rho"] = c.rho;
  n["offdiag"]["r_list"] = flow(YAML::Node(c.r_list));
  n["offdiag"]["support_radius"] = c.support_radius;
  n["kernel"]["tolerance"] = c.kernel_tolerance;
  n["output"]["directory"] = c.out_dir;
  n["output"]["label"] = c.label;
  YAML::Node formats;
  if (c.write_csv) formats.push_back("csv");
  if (c.write_binary) formats.push_back("binary");
  if (c.write_summary) formats.push_back("summary");
  n["output"]["formats"] = flow(formats);
  return n;
}

/// Quantities derived from the config, for the run summary.
inline YAML::Node derived_to_yaml(const RunConfig& c) {
  YAML::Node n;
  n["regime"] = to_string(c.params.regime);
  n["a1"] = c.params.roots.a1;
  n["a2"] = c.params.roots.a2;
  n["L_auto"] = c.side_auto;
  n["spacing"] = c.side / c.points;
  n["W0"] = c.weight.sup();
  n["eps_from_k_list"] = c.eps_from_k;
  n["seed_center"] = c.seed_center ? "configured" : "first maximizer";
  n["line_search"]["backtrack"] = SolverOptions{}.backtrack;
  n["line_search"]["sufficient_decrease"] = SolverOptions{}.sufficient_decrease;
  n["line_search"]["initial_step"] = SolverOptions{}.initial_step;
  n["line_search"]["max_step"] = SolverOptions{}.max_step;
  return n;
}

}  // namespace nlh
