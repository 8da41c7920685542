#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "xfl/spinor.hpp"

namespace xfl::cli {

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : Error(line > 0 ? source + ":" + std::to_string(line) + ": " + what : source + ": " + what),
      line_(line) {}

bool is_experiment(const std::string& name) {
  return std::find(std::begin(kExperiments), std::end(kExperiments), name) != std::end(kExperiments);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

struct Ctx {
  const std::string& source;
  int line;
  const std::string& key;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source, line, "key '" + key + "': " + what);
  }

  double real(const std::string& v) const {
    double x = 0.0;
    const auto* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, x);
    if (v.empty() || r.ec != std::errc() || r.ptr != end || !std::isfinite(x)) {
      fail("'" + v + "' is not a finite number");
    }
    return x;
  }

  std::size_t count(const std::string& v) const {
    std::size_t x = 0;
    const auto* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, x);
    if (v.empty() || r.ec != std::errc() || r.ptr != end) fail("'" + v + "' is not a nonnegative integer");
    return x;
  }

  std::vector<double> reals(const std::string& v, std::size_t need = 0) const {
    std::vector<double> out;
    for (const auto& s : split_list(v)) out.push_back(real(s));
    if (out.empty()) fail("empty list");
    if (need && out.size() != need) fail("expected " + std::to_string(need) + " numbers");
    return out;
  }

  Vec3 vec3(const std::string& v) const {
    const auto r = reals(v, 3);
    return {r[0], r[1], r[2]};
  }
};

// Keys each experiment accepts. A trailing '*' matches charge indices.
const std::map<std::string, std::set<std::string>>& key_table() {
  static const std::map<std::string, std::set<std::string>> table = [] {
    const std::set<std::string> common = {"experiment", "seed"};
    const std::set<std::string> grid = {"grid.n", "grid.dims", "grid.h", "grid.boundary", "grid.origin"};
    auto join = [](std::initializer_list<std::set<std::string>> parts) {
      std::set<std::string> s;
      for (const auto& p : parts) s.insert(p.begin(), p.end());
      return s;
    };
    std::map<std::string, std::set<std::string>> t;
    t["coulomb-check"] = join({common, grid, {"epsilon0", "charge.*.value", "coulomb.separations"}});
    t["energy-scan"] = join({common, grid, {"epsilon0", "charge.*.value", "energy.separations"}});
    t["selfenergy-scan"] =
        join({common, {"epsilon0", "charge.*.value", "selfenergy.h_list", "selfenergy.extent"}});
    t["dispersion"] = join({common,
                            {"dispersion.k", "dispersion.m", "dispersion.nx", "dispersion.h0",
                             "dispersion.periods", "dynamics.dt_factor"}});
    t["decompose"] = join({common, grid,
                           {"decompose.signal", "decompose.snapshots", "decompose.cycles", "decompose.dt",
                            "decompose.input", "dynamics.dt_factor", "dynamics.stride", "dynamics.mass"}});
    t["lagrangian-audit"] = join({common, grid,
                                    {"lagrangian.histories", "lagrangian.snapshots", "lagrangian.dt",
                                     "dynamics.mass", "dynamics.dt_factor"}});
    t["spinor-demo"] = join({common, grid,
                             {"charge.*.value", "charge.*.position", "charge.*.velocity", "charge.*.lambda",
                              "spinor.histories", "dynamics.steps", "dynamics.mass", "dynamics.dt_factor"}});
    return t;
  }();
  return table;
}

// "charge.3.value" -> ("charge.*.value", 3)
std::pair<std::string, std::optional<std::size_t>> normalize_key(const std::string& key) {
  if (key.rfind("charge.", 0) != 0) return {key, std::nullopt};
  const auto dot = key.find('.', 7);
  if (dot == std::string::npos) return {key, std::nullopt};
  const std::string idx = key.substr(7, dot - 7);
  std::size_t n = 0;
  const auto r = std::from_chars(idx.data(), idx.data() + idx.size(), n);
  if (idx.empty() || r.ec != std::errc() || r.ptr != idx.data() + idx.size()) return {key, std::nullopt};
  return {"charge.*" + key.substr(dot), n};
}

Spinor4 parse_lambda(const Ctx& ctx, const std::string& v) {
  const auto r = ctx.reals(v);
  Spinor4 out{};
  if (r.size() == 4) {
    for (std::size_t a = 0; a < 4; ++a) out[a] = r[a];
  } else if (r.size() == 8) {
    for (std::size_t a = 0; a < 4; ++a) out[a] = cplx(r[2 * a], r[2 * a + 1]);
  } else {
    ctx.fail("lambda needs 4 real or 8 (re, im) numbers");
  }
  return out;
}

}  // namespace

ScenarioConfig default_config(const std::string& experiment) {
  if (!is_experiment(experiment)) throw ConfigError("<defaults>", 0, "unknown experiment '" + experiment + "'");
  ScenarioConfig c;
  c.experiment = experiment;
  ChargeSpec unit;
  unit.value = 1.0;
  if (experiment == "coulomb-check" || experiment == "energy-scan") {
    c.grid = {{96, 96, 96}, 1.0, Boundary::free_space, {}};
    c.charges = {unit, unit};
  } else if (experiment == "selfenergy-scan") {
    c.charges = {unit};
  } else if (experiment == "decompose" || experiment == "lagrangian-audit") {
    c.grid = {{8, 8, 8}, 1.0, Boundary::periodic, {}};
    c.snapshots = experiment == "decompose" ? 32 : 12;
    if (experiment == "lagrangian-audit") c.dynamics.mass = 0.3;
  } else if (experiment == "spinor-demo") {
    c.grid = {{16, 16, 16}, 1.0, Boundary::periodic, {}};
    ChargeSpec s;
    s.species = Species::spinor;
    s.lambda = Spinor4{1.0, 0.0, 0.0, 0.0};
    s.position = {7.5, 7.5, 7.5};
    c.charges = {s};
    c.dynamics.steps = 24;
  }
  return c;
}

ScenarioConfig parse_config(std::istream& in, const std::string& source, const std::string& experiment) {
  ScenarioConfig c = default_config(experiment);
  const auto& allowed = key_table().at(experiment);
  std::set<std::string> seen;
  std::map<std::size_t, std::map<std::string, std::pair<std::string, int>>> charge_keys;
  std::optional<std::pair<std::string, int>> grid_n, grid_dims;

  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(source, line, "expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError(source, line, "empty key");
    if (value.empty()) throw ConfigError(source, line, "key '" + key + "' has no value");
    if (!seen.insert(key).second) throw ConfigError(source, line, "duplicate key '" + key + "'");
    const auto [pattern, index] = normalize_key(key);
    if (!allowed.count(pattern)) {
      throw ConfigError(source, line, "unknown key '" + key + "' for experiment " + experiment);
    }
    c.echo.emplace_back(key, value);
    const Ctx ctx{source, line, key};

    if (index) {
      charge_keys[*index][pattern.substr(9)] = {value, line};
    } else if (key == "experiment") {
      if (value != experiment) ctx.fail("config is for '" + value + "', not '" + experiment + "'");
    } else if (key == "seed") {
      c.seed = ctx.count(value);
    } else if (key == "grid.n") {
      grid_n = {value, line};
    } else if (key == "grid.dims") {
      grid_dims = {value, line};
    } else if (key == "grid.h") {
      c.grid.h = ctx.real(value);
    } else if (key == "grid.boundary") {
      try {
        c.grid.boundary = boundary_from_string(value);
      } catch (const Error&) {
        ctx.fail("boundary must be 'periodic' or 'free-space'");
      }
    } else if (key == "grid.origin") {
      c.grid.origin = ctx.vec3(value);
    } else if (key == "epsilon0") {
      c.epsilon0 = ctx.real(value);
    } else if (key == "coulomb.separations" || key == "energy.separations") {
      c.separations = ctx.reals(value);
    } else if (key == "selfenergy.h_list") {
      c.h_list = ctx.reals(value);
    } else if (key == "selfenergy.extent") {
      c.extent = ctx.real(value);
    } else if (key == "dispersion.k") {
      c.k_list = ctx.reals(value);
    } else if (key == "dispersion.m") {
      c.m_list = ctx.reals(value);
    } else if (key == "dispersion.nx") {
      c.dispersion_nx = ctx.count(value);
    } else if (key == "dispersion.h0") {
      c.dispersion_h0 = ctx.real(value);
    } else if (key == "dispersion.periods") {
      c.periods = ctx.real(value);
    } else if (key == "decompose.signal") {
      if (value != "cosine" && value != "random" && value != "wave" && value != "file") {
        ctx.fail("signal must be one of cosine, random, wave, file");
      }
      c.signal = value;
    } else if (key == "decompose.snapshots" || key == "lagrangian.snapshots") {
      c.snapshots = ctx.count(value);
    } else if (key == "decompose.cycles") {
      c.cycles = ctx.real(value);
    } else if (key == "decompose.dt" || key == "lagrangian.dt") {
      c.sample_dt = ctx.real(value);
    } else if (key == "decompose.input") {
      c.input = value;
    } else if (key == "lagrangian.histories" || key == "spinor.histories") {
      c.histories = ctx.count(value);
    } else if (key == "dynamics.dt_factor") {
      c.dynamics.dt_factor = ctx.real(value);
    } else if (key == "dynamics.steps") {
      c.dynamics.steps = ctx.count(value);
    } else if (key == "dynamics.stride") {
      c.dynamics.stride = ctx.count(value);
    } else if (key == "dynamics.mass") {
      c.dynamics.mass = ctx.real(value);
    }
  }

  if (grid_n && grid_dims) {
    throw ConfigError(source, grid_dims->second, "give either grid.n or grid.dims, not both");
  }
  if (grid_n) {
    const std::string key = "grid.n";
    const auto n = Ctx{source, grid_n->second, key}.count(grid_n->first);
    c.grid.dims = {n, n, n};
  }
  if (grid_dims) {
    const std::string key = "grid.dims";
    const Ctx ctx{source, grid_dims->second, key};
    std::vector<std::size_t> d;
    for (const auto& s : split_list(grid_dims->first)) d.push_back(ctx.count(s));
    if (d.size() != 3) ctx.fail("expected 3 integers");
    c.grid.dims = {d[0], d[1], d[2]};
  }

  if (!charge_keys.empty()) {
    std::vector<ChargeSpec> charges;
    std::size_t expect = 0;
    for (const auto& [index, keys] : charge_keys) {
      const int first_line = keys.begin()->second.second;
      if (index != expect) {
        throw ConfigError(source, first_line, "charge indices must run 0, 1, 2, ... without gaps");
      }
      ++expect;
      ChargeSpec q = c.charges.empty() ? ChargeSpec{} : c.charges.front();
      if (index < c.charges.size()) q = c.charges[index];
      for (const auto& [field, vl] : keys) {
        const std::string key = "charge." + std::to_string(index) + "." + field;
        const Ctx ctx{source, vl.second, key};
        if (field == "value") q.value = ctx.real(vl.first);
        if (field == "position") q.position = ctx.vec3(vl.first);
        if (field == "velocity") q.velocity = ctx.vec3(vl.first);
        if (field == "lambda") q.lambda = parse_lambda(ctx, vl.first);
      }
      charges.push_back(q);
    }
    c.charges = std::move(charges);
  }
  validate(c);
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path, const std::string& experiment) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
  return parse_config(in, path.string(), experiment);
}

void validate(const ScenarioConfig& c) {
  const std::string src = "config";
  auto fail = [&](const std::string& what) { throw ConfigError(src, 0, what); };
  const auto& e = c.experiment;
  try {
    if (e != "dispersion" && e != "selfenergy-scan") {
      c.grid.grid().require_solver_size();
    }
  } catch (const Error& err) {
    fail(std::string("invalid grid: ") + err.what());
  }
  if (!(c.epsilon0 > 0.0)) fail("epsilon0 must be positive");
  if (!(c.dynamics.dt_factor > 0.0) || c.dynamics.dt_factor > kCflFactorMax) {
    fail("dynamics.dt_factor must lie in (0, 0.9]");
  }
  if (c.dynamics.mass < 0.0) fail("dynamics.mass must be nonnegative");
  if (c.dynamics.stride == 0) fail("dynamics.stride must be positive");

  if (e == "coulomb-check" || e == "energy-scan") {
    if (c.charges.size() != 2) fail(e + " requires exactly 2 charges");
    if (c.grid.boundary != Boundary::free_space) fail(e + " requires a free-space grid");
    if (c.separations.empty()) fail("separation list is empty");
    for (double r : c.separations) {
      if (!(r > 0.0)) fail("separations must be positive");
      const auto g = c.grid.grid();
      const Vec3 mid = g.center();
      for (double s : {-0.5, 0.5}) {
        Vec3 p = mid;
        p[0] += s * r * c.grid.h;
        if (!g.contains(p)) fail("separation " + std::to_string(r) + " h does not fit in the grid");
      }
    }
  } else if (e == "selfenergy-scan") {
    if (c.charges.size() != 1) fail("selfenergy-scan requires exactly 1 charge");
    if (!(c.extent > 0.0)) fail("selfenergy.extent must be positive");
    for (double h : c.h_list) {
      if (!(h > 0.0)) fail("selfenergy.h_list entries must be positive");
      const double n = std::round(c.extent / h);
      if (n < kMinSolverCells) fail("h = " + std::to_string(h) + " leaves fewer than 8 nodes across the extent");
      if (n > 256) fail("h = " + std::to_string(h) + " needs more than 256 nodes per axis");
    }
  } else if (e == "dispersion") {
    if (c.k_list.size() != c.m_list.size()) fail("dispersion.k and dispersion.m must have equal length");
    if (c.dispersion_nx < kMinSolverCells) fail("dispersion.nx must be at least 8");
    if (!(c.dispersion_h0 > 0.0)) fail("dispersion.h0 must be positive");
    if (!(c.periods >= 4.0)) fail("dispersion.periods must be at least 4");
    for (std::size_t n = 0; n < c.k_list.size(); ++n) {
      if (c.k_list[n] < 0.0 || c.m_list[n] < 0.0) fail("k and m must be nonnegative");
      if (c.k_list[n] == 0.0 && c.m_list[n] == 0.0) fail("k = m = 0 has no oscillation to measure");
    }
  } else if (e == "decompose") {
    if (c.snapshots < 8) fail("decompose.snapshots must be at least 8");
    if (!(c.sample_dt > 0.0)) fail("decompose.dt must be positive");
    if (c.signal == "file" && c.input.empty()) fail("decompose.signal = file needs decompose.input");
    if (c.signal != "file" && !c.input.empty()) fail("decompose.input is only used with signal = file");
    const bool sampled = c.signal == "cosine" || c.signal == "random";
    for (const auto& [k, v] : c.echo) {
      if (!sampled && k == "decompose.dt") fail("decompose.dt is only used with signal = cosine or random");
      if (c.signal != "cosine" && k == "decompose.cycles") fail("decompose.cycles is only used with signal = cosine");
      if (c.signal != "wave" && k.rfind("dynamics.", 0) == 0) fail(k + " is only used with signal = wave");
    }
    if (c.signal == "cosine") {
      const double half = static_cast<double>(c.snapshots) / 2.0;
      if (c.cycles != std::floor(c.cycles) || c.cycles < 1.0 || c.cycles >= half) {
        fail("decompose.cycles must be a whole number in [1, snapshots / 2)");
      }
    }
  } else if (e == "lagrangian-audit") {
    if (c.histories == 0) fail("lagrangian.histories must be positive");
    if (c.snapshots < 8) fail("lagrangian.snapshots must be at least 8");
    if (!(c.sample_dt > 0.0)) fail("lagrangian.dt must be positive");
    if (c.grid.boundary != Boundary::periodic) fail("lagrangian-audit uses a periodic grid");
  } else if (e == "spinor-demo") {
    if (c.charges.size() != 1) fail("spinor-demo requires exactly 1 charge");
    if (c.histories == 0) fail("spinor.histories must be positive");
    if (c.dynamics.steps < 3) fail("dynamics.steps must be at least 3");
    auto q = c.charges.front();
    if (!q.lambda) fail("charge.0.lambda is required");
    try {
      q.lambda = normalize_lambda(*q.lambda);
      q.validate();
      if (!c.grid.grid().contains(q.position)) fail("spinor charge lies outside the grid");
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& err) {
      fail(err.what());
    }
  }
}

}  // namespace xfl::cli
