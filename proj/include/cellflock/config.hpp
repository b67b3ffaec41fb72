#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cellflock/domain.hpp"
#include "cellflock/simulator.hpp"

namespace cellflock {

inline constexpr const char* kVersion = "0.1.0";

struct SweepAxis {
  std::string path;                 // e.g. "polarity.D", "model.density"
  std::vector<std::string> values;  // literal tokens, parsed when applied
};

struct SweepSpec {
  std::vector<SweepAxis> axes;
  int n_reps = 20;
  std::uint64_t base_seed = 1;
};

struct OutputSpec {
  std::string dir;
  bool trajectory = false;
};

struct ExperimentConfig {
  ModelParams model;
  Domain domain{PeriodicSquare{200.0}, {}};
  std::string obstacle_preset = "none";
  SweepSpec sweep;
  OutputSpec output;

  void validate() const {
    model.validate();
    domain.validate();
    if (sweep.n_reps < 1) throw std::invalid_argument("n_reps must be >= 1");
  }
};

inline std::vector<Obstacle> obstacle_preset(const std::string& name, double L,
                                             double R0) {
  const double r = R0;           // obstacles are immobile cells
  const double off = 2 * R0 + r; // wall-to-surface gap of one cell diameter
  if (name == "none") return {};
  if (name == "center") return {{{L / 2, L / 2}, r}};
  if (name == "side") return {{{off, L / 2}, r}};
  if (name == "corner") return {{{off, off}, r}};
  if (name == "four_sides") {
    return {{{off, L / 2}, r}, {{L - off, L / 2}, r},
            {{L / 2, off}, r}, {{L / 2, L - off}, r}};
  }
  if (name == "four_corners") {
    return {{{off, off}, r}, {{L - off, off}, r},
            {{off, L - off}, r}, {{L - off, L - off}, r}};
  }
  throw std::invalid_argument("unknown obstacle preset '" + name + "'");
}

namespace detail {

struct ConfigEntry {
  std::string value;
  int line = 0;
  mutable bool used = false;
};

struct RawConfig {
  std::string path;
  std::map<std::string, ConfigEntry> entries;  // "section.key" -> value

  [[noreturn]] void fail(const std::string& msg, int line) const {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
  }

  const ConfigEntry* find(const std::string& key) const {
    const auto it = entries.find(key);
    if (it == entries.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  double number(const std::string& key, double fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(e->value, &pos);
    } catch (const std::exception&) {
      fail("expected a number for '" + key + "', got '" + e->value + "'",
           e->line);
    }
    if (pos != e->value.size()) {
      fail("trailing characters in number for '" + key + "'", e->line);
    }
    return v;
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    const auto* e = find(key);
    return e ? e->value : fallback;
  }

  bool flag(const std::string& key, bool fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1") return true;
    if (e->value == "false" || e->value == "0") return false;
    fail("expected true/false for '" + key + "'", e->line);
  }
};

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline RawConfig parse_ini(std::istream& in, const std::string& path) {
  RawConfig raw;
  raw.path = path;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') raw.fail("unterminated section header", lineno);
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) raw.fail("empty section name", lineno);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) raw.fail("expected 'key = value'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) raw.fail("empty key", lineno);
    if (section.empty()) raw.fail("key outside any [section]", lineno);
    const std::string full = section + "." + key;
    if (raw.entries.count(full)) raw.fail("duplicate key '" + full + "'", lineno);
    raw.entries[full] = {value, lineno, false};
  }
  return raw;
}

inline std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_number(const std::string& tok, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("expected a number for " + what + ", got '" + tok +
                             "'");
  }
  if (pos != tok.size()) {
    throw std::runtime_error("trailing characters in number for " + what);
  }
  return v;
}

}  // namespace detail

inline int cells_for_density(double rho, double R0, const Domain& domain) {
  const int n = static_cast<int>(
      std::llround(rho * area(domain) / (std::numbers::pi * R0 * R0)));
  if (n < 1) throw std::runtime_error("density too low: rounds to zero cells");
  return n;
}

// Applies one sweep-axis assignment to a resolved config.
inline void apply_axis(ExperimentConfig& cfg, const std::string& path,
                       const std::string& value) {
  const auto num = [&] { return detail::parse_number(value, "axis " + path); };
  if (path == "polarity.D") {
    cfg.model.polarity.Dnoise = num();
  } else if (path == "polarity.delta") {
    cfg.model.polarity.delta = num();
  } else if (path == "polarity.mu") {
    cfg.model.polarity.mu = num();
  } else if (path == "forces.kappa") {
    cfg.model.forces.kappa = num();
  } else if (path == "forces.gamma") {
    cfg.model.forces.gamma = num();
  } else if (path == "forces.Rc") {
    cfg.model.forces.Rc = num();
  } else if (path == "forces.Rint_ar") {
    cfg.model.forces.Rint_ar = num();
  } else if (path == "model.N") {
    cfg.model.N = static_cast<int>(num());
  } else if (path == "model.density") {
    cfg.model.N = cells_for_density(num(), cfg.model.R0, cfg.domain);
  } else if (path == "domain.obstacles") {
    const auto* w = std::get_if<WalledSquare>(&cfg.domain.shape);
    if (!w) {
      throw std::runtime_error("obstacle presets need a walled square domain");
    }
    cfg.obstacle_preset = value;
    cfg.domain.obstacles = obstacle_preset(value, w->L, cfg.model.R0);
  } else {
    throw std::runtime_error("unknown sweep axis '" + path + "'");
  }
}

inline ExperimentConfig load_config(std::istream& in, const std::string& path) {
  const detail::RawConfig raw = detail::parse_ini(in, path);
  ExperimentConfig cfg;

  // [domain]
  const std::string shape = raw.text("domain.shape", "periodic");
  const double L = raw.number("domain.L", 200.0);
  if (shape == "periodic") {
    cfg.domain.shape = PeriodicSquare{L};
  } else if (shape == "square") {
    cfg.domain.shape = WalledSquare{L};
  } else if (shape == "disk") {
    const double R = raw.number("domain.R", 200.0 / std::sqrt(std::numbers::pi));
    cfg.domain.shape = DiskDomain{{R, R}, R};
  } else {
    throw std::runtime_error(path + ": unknown domain shape '" + shape + "'");
  }

  // [model]
  cfg.model.R0 = raw.number("model.R0", cfg.model.R0);
  cfg.model.dt = raw.number("model.dt", cfg.model.dt);
  cfg.model.T = raw.number("model.T", cfg.model.T);
  cfg.model.seed = static_cast<std::uint64_t>(
      raw.number("model.seed", static_cast<double>(cfg.model.seed)));
  cfg.model.save_every = static_cast<int>(
      raw.number("model.save_every", cfg.model.save_every));
  cfg.model.activation = raw.number("model.activation", cfg.model.activation);
  cfg.model.relax_budget = static_cast<int>(
      raw.number("model.relax_budget", cfg.model.relax_budget));
  const auto* n_entry = raw.find("model.N");
  const auto* rho_entry = raw.find("model.density");
  if (n_entry && rho_entry) {
    raw.fail("set model.N or model.density, not both", rho_entry->line);
  }
  if (n_entry) {
    cfg.model.N = static_cast<int>(detail::parse_number(n_entry->value, "model.N"));
  } else if (rho_entry) {
    cfg.model.N = cells_for_density(
        detail::parse_number(rho_entry->value, "model.density"), cfg.model.R0,
        cfg.domain);
  }

  const std::string obstacles = raw.text("domain.obstacles", "none");
  if (obstacles != "none") {
    const auto* w = std::get_if<WalledSquare>(&cfg.domain.shape);
    if (!w) {
      throw std::runtime_error(path +
                               ": obstacle presets need domain shape = square");
    }
    cfg.obstacle_preset = obstacles;
    cfg.domain.obstacles = obstacle_preset(obstacles, w->L, cfg.model.R0);
  }

  // [forces]
  cfg.model.forces.kappa = raw.number("forces.kappa", cfg.model.forces.kappa);
  cfg.model.forces.gamma = raw.number("forces.gamma", cfg.model.forces.gamma);
  cfg.model.forces.Rc = raw.number("forces.Rc", cfg.model.forces.Rc);
  cfg.model.forces.Rint_ar =
      raw.number("forces.Rint_ar", cfg.model.forces.Rint_ar);

  // [polarity]
  cfg.model.polarity.mu = raw.number("polarity.mu", cfg.model.polarity.mu);
  cfg.model.polarity.delta =
      raw.number("polarity.delta", cfg.model.polarity.delta);
  cfg.model.polarity.Dnoise = raw.number("polarity.D", cfg.model.polarity.Dnoise);
  cfg.model.polarity.Rint_po =
      raw.number("polarity.Rint_po", cfg.model.polarity.Rint_po);
  cfg.model.polarity.c = raw.number("polarity.c", cfg.model.polarity.c);

  // [uzawa]
  cfg.model.uzawa.h = raw.number("uzawa.h", cfg.model.uzawa.h);
  cfg.model.uzawa.rel_tol = raw.number("uzawa.rel_tol", cfg.model.uzawa.rel_tol);
  cfg.model.uzawa.max_iter = static_cast<std::uint64_t>(
      raw.number("uzawa.max_iter", static_cast<double>(cfg.model.uzawa.max_iter)));
  const std::string variant = raw.text("uzawa.variant", "paper");
  if (variant == "paper") {
    cfg.model.uzawa.variant = UzawaVariant::paper;
  } else if (variant == "gauss_seidel") {
    cfg.model.uzawa.variant = UzawaVariant::gauss_seidel;
  } else {
    throw std::runtime_error(path + ": unknown uzawa variant '" + variant + "'");
  }

  // [sweep]
  cfg.sweep.n_reps = static_cast<int>(raw.number("sweep.n_reps", 20));
  cfg.sweep.base_seed = static_cast<std::uint64_t>(
      raw.number("sweep.base_seed", static_cast<double>(cfg.model.seed)));
  for (const auto& [key, entry] : raw.entries) {
    if (key.rfind("sweep.axis.", 0) == 0) {
      entry.used = true;
      SweepAxis axis;
      axis.path = key.substr(std::string("sweep.axis.").size());
      axis.values = detail::split_list(entry.value, ',');
      if (axis.values.empty()) {
        raw.fail("axis '" + axis.path + "' has no values", entry.line);
      }
      // fail fast on bad paths/values before any run starts
      ExperimentConfig probe = cfg;
      for (const auto& v : axis.values) apply_axis(probe, axis.path, v);
      cfg.sweep.axes.push_back(std::move(axis));
    }
  }
  std::sort(cfg.sweep.axes.begin(), cfg.sweep.axes.end(),
            [](const SweepAxis& a, const SweepAxis& b) { return a.path < b.path; });

  // [output]
  cfg.output.dir = raw.text("output.dir", "");
  cfg.output.trajectory = raw.flag("output.trajectory", false);

  for (const auto& [key, entry] : raw.entries) {
    if (!entry.used) raw.fail("unknown key '" + key + "'", entry.line);
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return load_config(in, path);
}

// Canonical text form of a fully resolved config; hashed into manifests.
inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "version " << kVersion << "\n";
  std::visit([&](const auto& s) {
    using T = std::decay_t<decltype(s)>;
    if constexpr (std::is_same_v<T, PeriodicSquare>) {
      os << "domain periodic L " << s.L << "\n";
    } else if constexpr (std::is_same_v<T, WalledSquare>) {
      os << "domain square L " << s.L << "\n";
    } else {
      os << "domain disk R " << s.R << "\n";
    }
  }, cfg.domain.shape);
  for (const auto& ob : cfg.domain.obstacles) {
    os << "obstacle " << ob.center.x << " " << ob.center.y << " " << ob.radius
       << "\n";
  }
  const ModelParams& m = cfg.model;
  os << "N " << m.N << "\nR0 " << m.R0 << "\ndt " << m.dt << "\nT " << m.T
     << "\nseed " << m.seed << "\nsave_every " << m.save_every
     << "\nactivation " << m.activation << "\nkappa " << m.forces.kappa
     << "\ngamma " << m.forces.gamma << "\nRc " << m.forces.Rc << "\nRint_ar "
     << m.forces.Rint_ar << "\nmu " << m.polarity.mu << "\ndelta "
     << m.polarity.delta << "\nD " << m.polarity.Dnoise << "\nRint_po "
     << m.polarity.Rint_po << "\nc " << m.polarity.c << "\nuzawa "
     << (m.uzawa.variant == UzawaVariant::paper ? "paper" : "gauss_seidel")
     << " " << m.uzawa.h << " " << m.uzawa.rel_tol << " " << m.uzawa.max_iter
     << "\n";
  return os.str();
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace cellflock
