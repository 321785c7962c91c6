#include "brwre/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

#include "brwre/environment.hpp"
#include "brwre/fk_oracle.hpp"
#include "brwre/moment_stats.hpp"
#include "brwre/parallel.hpp"
#include "brwre/particle_sim.hpp"
#include "brwre/rng.hpp"
#include "brwre/spectral.hpp"
#include "brwre/tail_analytics.hpp"

#ifndef BRWRE_VERSION
#define BRWRE_VERSION "unknown"
#endif

namespace brwre {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* version_string() { return BRWRE_VERSION; }

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string s = errors.size() == 1 ? "config error: " : "config errors:";
  if (errors.size() == 1) return s + errors.front();
  for (const auto& e : errors) s += "\n  " + e;
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) out.push_back(trim(cur));
  return out;
}

bool to_double(const std::string& s, double& out) {
  if (s == "inf" || s == "+inf") { out = kInf; return true; }
  if (s == "-inf") { out = kNegInf; return true; }
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e && !s.empty();
}

bool to_int(const std::string& s, long long& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  if (ec == std::errc() && p == e && !s.empty()) return true;
  // 1e6 style integers
  double d = 0.0;
  if (!to_double(s, d) || !std::isfinite(d) || d != std::floor(d) || std::fabs(d) > 9.0e18) return false;
  out = static_cast<long long>(d);
  return true;
}

struct Pending {
  std::string family;
  std::optional<double> rho, p;
};

using Errors = std::vector<std::string>;
using Setter = std::function<void(RunConfig&, Pending&, const std::string& key, const std::string& value, Errors&)>;

Setter real(double RunConfig::*field, double lo, double hi, bool lo_open = false) {
  return [=](RunConfig& c, Pending&, const std::string& k, const std::string& v, Errors& err) {
    double x = 0.0;
    if (!to_double(v, x) || std::isnan(x)) { err.push_back(k + ": not a number ('" + v + "')"); return; }
    const bool below = lo_open ? !(x > lo) : x < lo;
    if (below || x > hi) {
      err.push_back(k + ": " + format_double(x) + " out of range " + (lo_open ? "(" : "[") +
                    format_double(lo) + ", " + format_double(hi) + "]");
      return;
    }
    c.*field = x;
  };
}

template <class T>
Setter integer(T RunConfig::*field, long long lo, long long hi) {
  return [=](RunConfig& c, Pending&, const std::string& k, const std::string& v, Errors& err) {
    long long x = 0;
    if (!to_int(v, x)) { err.push_back(k + ": not an integer ('" + v + "')"); return; }
    if (x < lo || x > hi) {
      err.push_back(k + ": " + std::to_string(x) + " out of range [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");
      return;
    }
    c.*field = static_cast<T>(x);
  };
}

Setter real_list(std::vector<double> RunConfig::*field, double lo, double hi, bool lo_open) {
  return [=](RunConfig& c, Pending&, const std::string& k, const std::string& v, Errors& err) {
    std::vector<double> xs;
    for (const auto& item : split_list(v)) {
      double x = 0.0;
      if (!to_double(item, x) || !std::isfinite(x)) { err.push_back(k + ": not a number ('" + item + "')"); return; }
      if ((lo_open ? !(x > lo) : x < lo) || x > hi) {
        err.push_back(k + ": " + format_double(x) + " out of range " + (lo_open ? "(" : "[") +
                      format_double(lo) + ", " + format_double(hi) + "]");
        return;
      }
      xs.push_back(x);
    }
    c.*field = std::move(xs);
  };
}

Setter int_list(std::vector<long long> RunConfig::*field, long long lo, long long hi) {
  return [=](RunConfig& c, Pending&, const std::string& k, const std::string& v, Errors& err) {
    std::vector<long long> xs;
    for (const auto& item : split_list(v)) {
      long long x = 0;
      if (!to_int(item, x)) { err.push_back(k + ": not an integer ('" + item + "')"); return; }
      if (x < lo || x > hi) {
        err.push_back(k + ": " + std::to_string(x) + " out of range [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
        return;
      }
      xs.push_back(x);
    }
    c.*field = std::move(xs);
  };
}

Setter choice(std::string RunConfig::*field, std::vector<std::string> allowed) {
  return [=](RunConfig& c, Pending&, const std::string& k, const std::string& v, Errors& err) {
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      err.push_back(k + ": '" + v + "' is not one of " + list);
      return;
    }
    c.*field = v;
  };
}

Setter threshold(double RegimeThresholds::*field, double lo, double hi) {
  return [=](RunConfig& c, Pending&, const std::string& k, const std::string& v, Errors& err) {
    double x = 0.0;
    if (!to_double(v, x) || !(x >= lo && x <= hi)) {
      err.push_back(k + ": '" + v + "' out of range [" + format_double(lo) + ", " + format_double(hi) + "]");
      return;
    }
    c.thresholds.*field = x;
  };
}

constexpr double kBig = 1e300;

const std::map<std::string, Setter>& key_table() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["subcommand"] = choice(&RunConfig::subcommand, subcommand_names());
    t["family"] = [](RunConfig&, Pending& p, const std::string& k, const std::string& v, Errors& err) {
      try {
        tail_kind_from_name(v);
        p.family = v;
      } catch (const std::invalid_argument& e) {
        err.push_back(k + ": " + e.what());
      }
    };
    t["rho"] = [](RunConfig&, Pending& p, const std::string& k, const std::string& v, Errors& err) {
      double x = 0.0;
      if (!to_double(v, x)) { err.push_back(k + ": not a number ('" + v + "')"); return; }
      p.rho = x;
    };
    t["p"] = [](RunConfig&, Pending& p, const std::string& k, const std::string& v, Errors& err) {
      double x = 0.0;
      if (!to_double(v, x)) { err.push_back(k + ": not a number ('" + v + "')"); return; }
      p.p = x;
    };
    t["d"] = integer(&RunConfig::dim, 1, kMaxDim);
    t["kappa"] = real(&RunConfig::kappa, 0.0, 1e6);
    t["t"] = real_list(&RunConfig::t_grid, 0.0, 1e6, false);
    t["theta"] = real_list(&RunConfig::theta_grid, 0.0, 1.0, true);
    t["L"] = int_list(&RunConfig::L_list, 0, 10'000'000'000'000LL);
    t["radius"] = integer(&RunConfig::radius, -1, 100000);
    t["box_radius"] = integer(&RunConfig::box_radius, -1, 100000);
    t["R"] = integer(&RunConfig::replicas, 2, 100'000'000);
    t["seed"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v, Errors& err) {
      std::uint64_t x = 0;
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
      if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        err.push_back(k + ": not an unsigned 64-bit integer ('" + v + "')");
        return;
      }
      c.seed = x;
    };
    t["tol"] = real(&RunConfig::tol, 0.0, 0.5, true);
    t["out"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v, Errors& err) {
      if (v.empty()) { err.push_back(k + ": empty path"); return; }
      c.out = v;
    };
    t["threads"] = integer(&RunConfig::threads, 0, 4096);
    t["method"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v, Errors& err) {
      try {
        c.method = solve_method_from_name(v);
      } catch (const std::exception& e) {
        err.push_back(k + ": " + e.what());
      }
    };
    t["n_paths"] = integer(&RunConfig::n_paths, 100, 1'000'000'000'000LL);
    t["n_runs"] = integer(&RunConfig::n_runs, 1, 1'000'000'000'000LL);
    t["vmax"] = real(&RunConfig::vmax, -1.0, kBig);
    t["baseline_death"] = real(&RunConfig::baseline_death, 0.0, kBig);
    t["env_file"] = [](RunConfig& c, Pending&, const std::string&, const std::string& v, Errors&) { c.env_file = v; };
    t["a"] = real(&RunConfig::a, 0.0, 10.0, true);
    t["corr_y"] = int_list(&RunConfig::corr_y, 0, 100000);
    t["L_prime"] = integer(&RunConfig::L_prime, 0, 100000);
    t["r"] = integer(&RunConfig::fine_r, 0, 100000);
    t["experiment"] = choice(&RunConfig::experiment, {"lln", "clt", "critical"});
    t["schedule"] = choice(&RunConfig::schedule, {"gamma", "explicit", "f_eps"});
    t["gamma"] = real(&RunConfig::gamma, 0.0, 1e6);
    t["delta"] = real(&RunConfig::delta, -1e6, 1e6);
    t["f_eps"] = [](RunConfig& c, Pending&, const std::string& k, const std::string& v, Errors& err) {
      std::vector<std::pair<double, double>> table;
      for (const auto& item : split_list(v)) {
        const auto colon = item.find(':');
        double tt = 0.0, f = 0.0;
        if (colon == std::string::npos || !to_double(trim(item.substr(0, colon)), tt) ||
            !to_double(trim(item.substr(colon + 1)), f) || !(tt > 0.0) || !(f >= 0.0)) {
          err.push_back(k + ": expected t:F pairs with t > 0, F >= 0 ('" + item + "')");
          return;
        }
        table.emplace_back(tt, f);
      }
      c.f_eps = std::move(table);
    };
    t["band"] = threshold(&RegimeThresholds::band, 0.0, 1.0);
    t["fraction"] = threshold(&RegimeThresholds::fraction, 0.0, 1.0);
    t["max_abs_skew"] = threshold(&RegimeThresholds::max_abs_skew, 0.0, kBig);
    t["max_abs_exkurt"] = threshold(&RegimeThresholds::max_abs_exkurt, 0.0, kBig);
    t["min_ks_p"] = threshold(&RegimeThresholds::min_ks_p, 0.0, 1.0);
    t["degenerate_median"] = threshold(&RegimeThresholds::degenerate_median, 0.0, kBig);
    t["top_k"] = integer(&RunConfig::top_k, 1, 100'000'000);
    t["direct_max_sites"] = integer(&RunConfig::direct_max_sites, 1, 1'000'000'000'000LL);
    t["max_L"] = integer(&RunConfig::max_L, 1, 10'000'000'000'000LL);
    return t;
  }();
  return table;
}

struct Entry {
  std::string key, value;
  std::string where;
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"sample-env", "solve",       "fk",           "particles",
                                              "spectral-check", "exponents", "exponents-mc", "regime"};
  return names;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  Errors errors;
  std::vector<Entry> entries;
  std::map<std::string, std::size_t> first_line;

  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (lineno == 1 && raw.rfind("\xEF\xBB\xBF", 0) == 0) raw.erase(0, 3);
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    Entry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), "line " + std::to_string(lineno)};
    if (auto it = first_line.find(e.key); it != first_line.end()) {
      errors.push_back(e.where + ": duplicate key '" + e.key + "' (first set on line " +
                       std::to_string(it->second) + ")");
      continue;
    }
    first_line[e.key] = lineno;
    entries.push_back(std::move(e));
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      errors.push_back("override '" + o + "': expected key=value");
      continue;
    }
    Entry e{trim(o.substr(0, eq)), trim(o.substr(eq + 1)), "override"};
    auto it = std::find_if(entries.begin(), entries.end(), [&](const Entry& x) { return x.key == e.key; });
    if (it != entries.end()) {
      it->value = e.value;
      it->where = e.where;
    } else {
      entries.push_back(std::move(e));
    }
  }

  RunConfig cfg;
  Pending pending;
  const auto& table = key_table();
  for (const auto& e : entries) {
    auto it = table.find(e.key);
    if (it == table.end()) {
      errors.push_back(e.where + ": unknown key '" + e.key + "'");
      continue;
    }
    if (e.value.empty()) {
      errors.push_back(e.where + ": " + e.key + ": empty value");
      continue;
    }
    Errors local;
    it->second(cfg, pending, e.key, e.value, local);
    for (auto& m : local) errors.push_back(e.where + ": " + m);
  }

  // Family and its parameter.
  if (!pending.family.empty()) {
    const TailKind kind = tail_kind_from_name(pending.family);
    const bool wants_rho = kind == TailKind::Weibull || kind == TailKind::DoubleExp || kind == TailKind::Frechet;
    const bool wants_p = kind == TailKind::HardCore;
    if (pending.rho && !wants_rho) errors.push_back("rho does not apply to family " + pending.family);
    if (pending.p && !wants_p) errors.push_back("p does not apply to family " + pending.family);
    std::optional<double> param = wants_rho ? pending.rho : wants_p ? pending.p : std::optional<double>(0.0);
    if (!param) {
      errors.push_back(pending.family + ": " + (wants_p ? "p" : "rho") + " required");
    } else {
      try {
        cfg.family = TailFamily::make(kind, *param);
      } catch (const std::invalid_argument& ex) {
        errors.push_back(ex.what());
      }
    }
  } else if (pending.rho || pending.p) {
    errors.push_back("rho / p given without family");
  }

  // Cross-field checks.
  if (cfg.t_grid.empty()) errors.push_back("t: at least one value required");
  if (cfg.L_list.empty()) errors.push_back("L: at least one value required");
  if (cfg.schedule == "explicit" && cfg.subcommand == "regime" && cfg.L_list.size() != cfg.t_grid.size())
    errors.push_back("schedule = explicit needs one L per t (" + std::to_string(cfg.L_list.size()) + " L, " +
                     std::to_string(cfg.t_grid.size()) + " t)");
  if (cfg.schedule == "f_eps" && cfg.subcommand == "regime" && cfg.f_eps.empty())
    errors.push_back("schedule = f_eps needs an f_eps table");
  if (cfg.thresholds.fraction > 0.0 && cfg.subcommand == "regime" && cfg.replicas < 2)
    errors.push_back("R: at least 2 replicas required");

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

RunConfig read_config_file(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

namespace {

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string s;
  for (const auto& x : xs) {
    if (!s.empty()) s += ", ";
    if constexpr (std::is_floating_point_v<T>) s += format_double(x);
    else s += std::to_string(x);
  }
  return s;
}

std::vector<std::pair<std::string, std::string>> normalized_pairs(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> kv;
  auto add = [&](const std::string& k, const std::string& v) { kv.emplace_back(k, v); };
  if (!c.subcommand.empty()) add("subcommand", c.subcommand);
  if (c.family) {
    add("family", c.family->name());
    if (c.family->kind() == TailKind::HardCore) add("p", format_double(c.family->param()));
    else if (c.family->kind() != TailKind::SquaredDoubleExp) add("rho", format_double(c.family->param()));
  }
  add("d", std::to_string(c.dim));
  add("kappa", format_double(c.kappa));
  add("t", join(c.t_grid));
  add("theta", join(c.theta_grid));
  add("L", join(c.L_list));
  add("radius", std::to_string(c.radius));
  add("box_radius", std::to_string(c.box_radius));
  add("R", std::to_string(c.replicas));
  add("seed", std::to_string(c.seed));
  add("tol", format_double(c.tol));
  add("out", c.out);
  add("threads", std::to_string(c.threads));
  add("method", solve_method_name(c.method));
  add("n_paths", std::to_string(c.n_paths));
  add("n_runs", std::to_string(c.n_runs));
  add("vmax", format_double(c.vmax));
  add("baseline_death", format_double(c.baseline_death));
  if (!c.env_file.empty()) add("env_file", c.env_file);
  add("a", format_double(c.a));
  if (!c.corr_y.empty()) add("corr_y", join(c.corr_y));
  add("L_prime", std::to_string(c.L_prime));
  add("r", std::to_string(c.fine_r));
  add("experiment", c.experiment);
  add("schedule", c.schedule);
  add("gamma", format_double(c.gamma));
  add("delta", format_double(c.delta));
  if (!c.f_eps.empty()) {
    std::string s;
    for (const auto& [tt, f] : c.f_eps) s += (s.empty() ? "" : ", ") + format_double(tt) + ":" + format_double(f);
    add("f_eps", s);
  }
  add("band", format_double(c.thresholds.band));
  add("fraction", format_double(c.thresholds.fraction));
  add("max_abs_skew", format_double(c.thresholds.max_abs_skew));
  add("max_abs_exkurt", format_double(c.thresholds.max_abs_exkurt));
  add("min_ks_p", format_double(c.thresholds.min_ks_p));
  add("degenerate_median", format_double(c.thresholds.degenerate_median));
  add("top_k", std::to_string(c.top_k));
  add("direct_max_sites", std::to_string(c.direct_max_sites));
  add("max_L", std::to_string(c.max_L));
  return kv;
}

}  // namespace

std::string RunConfig::normalized() const {
  std::string s;
  for (const auto& [k, v] : normalized_pairs(*this)) s += k + " = " + v + "\n";
  return s;
}

bool RunReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

// ---------------------------------------------------------------------------
// Output

namespace {

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
    if (!out_) throw std::runtime_error("write failed: " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

std::string f(double x) { return format_double(x); }
template <class I>
std::string n(I x) { return std::to_string(x); }

std::vector<std::string> site_header(int dim) {
  std::vector<std::string> h;
  for (int k = 0; k < dim; ++k) h.push_back("x" + std::to_string(k));
  return h;
}

void append_site(std::vector<std::string>& row, const Site& s, int dim) {
  for (int k = 0; k < dim; ++k) row.push_back(std::to_string(s[k]));
}

std::vector<Site> sites_of(int dim, int L) {
  const Box b = Box::centered(dim, L);
  std::vector<Site> out;
  out.reserve(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) out.push_back(b.site(i));
  return out;
}

class Runner {
 public:
  explicit Runner(const RunConfig& c) : c_(c), dir_(c.out) {
    threads_ = c.threads ? c.threads : default_thread_budget();
  }

  RunReport run() {
    validate();
    fs::create_directories(dir_);
    const auto start = std::chrono::steady_clock::now();
    const std::string& s = c_.subcommand;
    if (s == "sample-env") sample_env();
    else if (s == "solve") solve();
    else if (s == "fk") fk();
    else if (s == "particles") particles();
    else if (s == "spectral-check") spectral();
    else if (s == "exponents") exponents();
    else if (s == "exponents-mc") exponents_mc();
    else if (s == "regime") regime();
    const auto stop = std::chrono::steady_clock::now();
    report_.seconds = std::chrono::duration<double>(stop - start).count();
    {
      std::ofstream cfg(dir_ / "config.cfg", std::ios::binary);
      cfg << c_.normalized();
      if (!cfg) throw std::runtime_error("write failed: " + (dir_ / "config.cfg").string());
    }
    write_summary();
    return report_;
  }

 private:
  const RunConfig& c_;
  fs::path dir_;
  unsigned threads_ = 1;
  RunReport report_;

  void validate() const {
    std::vector<std::string> errors;
    if (c_.subcommand.empty()) errors.push_back("subcommand: required");
    const bool needs_family = c_.subcommand != "spectral-check" || c_.env_file.empty();
    if (needs_family && c_.env_file.empty() && !c_.family) errors.push_back("family: required");
    if (c_.subcommand == "regime" && c_.experiment == "critical" && !(c_.gamma > 0.0))
      errors.push_back("gamma: > 0 required for the critical experiment");
    if (c_.subcommand == "exponents-mc" && c_.L_prime > 0) {
      if (c_.L_list.front() < 1) errors.push_back("L: >= 1 required for a partition");
    }
    if (!errors.empty()) throw ConfigError(errors);
  }

  fs::path file(const std::string& name) {
    report_.files.push_back(name);
    return dir_ / name;
  }

  void check(std::string name, bool ok, std::string detail = {}) {
    report_.checks.push_back({std::move(name), ok, std::move(detail)});
  }

  double t_max() const { return *std::max_element(c_.t_grid.begin(), c_.t_grid.end()); }
  int L0() const { return static_cast<int>(c_.L_list.front()); }

  Environment environment(int needed_radius) const {
    const int radius = std::max(needed_radius, c_.radius);
    if (!c_.env_file.empty()) {
      fs::path csv = c_.env_file;
      fs::path js = csv;
      js.replace_extension(".json");
      Environment env = load_environment(csv, js);
      if (env.radius() < needed_radius)
        throw WindowTooSmall("environment file radius " + std::to_string(env.radius()) + " < " +
                                 std::to_string(needed_radius),
                             needed_radius);
      return c_.vmax >= 0.0 ? clip_branching(env, c_.vmax) : env;
    }
    Environment env = sample_environment(*c_.family, c_.dim, radius, c_.seed, c_.baseline_death);
    return c_.vmax >= 0.0 ? clip_branching(env, c_.vmax) : env;
  }

  void sample_env() {
    const int radius = c_.radius >= 0 ? c_.radius : 10;
    Environment env = sample_environment(*c_.family, c_.dim, radius, c_.seed, c_.baseline_death);
    if (c_.vmax >= 0.0) env = clip_branching(env, c_.vmax);
    const fs::path csv = file("env.csv");
    const fs::path js = file("env.json");
    save_environment(env, csv, js);
    check("env-roundtrip", load_environment(csv, js) == env);
  }

  void solve() {
    const int L = L0();
    const bool boxed = c_.box_radius >= 0;
    if (boxed && c_.box_radius < L) throw ConfigError({"box_radius: must be >= L for a truncated solve"});
    const int R = truncation_radius(c_.dim, c_.kappa, t_max(), c_.tol);
    const Environment env = environment(boxed ? c_.box_radius : L + R);
    const auto xs = sites_of(c_.dim, L);

    auto header = std::vector<std::string>{"t"};
    for (auto& h : site_header(c_.dim)) header.push_back(h);
    header.insert(header.end(), {"mantissa", "log_offset"});
    Csv csv(file("moments.csv"), header);

    bool finite = true;
    double kappa0_err = 0.0;
    for (double t : c_.t_grid) {
      std::vector<std::pair<double, double>> vals(xs.size());
      if (boxed) {
        const MomentField m = solve_truncated(env, Box::centered(c_.dim, c_.box_radius), c_.kappa, t, c_.method,
                                              std::min(c_.tol, 1e-10));
        for (std::size_t i = 0; i < xs.size(); ++i) vals[i] = {m.mantissa[m.box.index(xs[i])], m.log_offset};
      } else {
        parallel_for(xs.size(), threads_, [&](std::size_t i) {
          const auto u = solve_untruncated(env, xs[i], c_.kappa, t, c_.tol, c_.method);
          vals[i] = {u.mantissa, u.log_offset};
        });
      }
      for (std::size_t i = 0; i < xs.size(); ++i) {
        std::vector<std::string> row{f(t)};
        append_site(row, xs[i], c_.dim);
        row.push_back(f(vals[i].first));
        row.push_back(f(vals[i].second));
        csv.row(row);
        if (!(vals[i].first >= 0.0) || !std::isfinite(vals[i].first)) finite = false;
        if (c_.kappa == 0.0 && !env.hard_core(xs[i])) {
          const double want = std::exp(env.v(xs[i]) * t - vals[i].second);
          kappa0_err = std::max(kappa0_err, want >= 1e-300 ? std::fabs(vals[i].first / want - 1.0) : vals[i].first / 1e-300);
        }
      }
    }
    check("moments-finite-nonnegative", finite);
    if (c_.kappa == 0.0) check("kappa0-exact", kappa0_err <= 1e-12, "max relative error " + f(kappa0_err));
  }

  void fk() {
    const int L = L0();
    const bool boxed = c_.box_radius >= 0;
    const int R = truncation_radius(c_.dim, c_.kappa, t_max(), std::min(c_.tol, 1e-12));
    const Environment env = environment(L + (boxed ? c_.box_radius : R));
    const auto xs = sites_of(c_.dim, L);

    auto header = std::vector<std::string>{"t"};
    for (auto& h : site_header(c_.dim)) header.push_back(h);
    header.insert(header.end(), {"log_mean", "stderr", "n_paths", "n_killed"});
    Csv csv(file("fk.csv"), header);

    double worst = 0.0;
    std::size_t idx = 0;
    for (double t : c_.t_grid) {
      for (const Site& x : xs) {
        const std::optional<Box> box = boxed ? std::optional<Box>(Box(c_.dim, x, c_.box_radius)) : std::nullopt;
        const FkEstimate e = fk_estimate(env, x, c_.kappa, t, box, c_.n_paths, derive_seed(c_.seed, "fk", idx++), threads_);
        std::vector<std::string> row{f(t)};
        append_site(row, x, c_.dim);
        row.insert(row.end(), {f(e.log_mean), f(e.log_stderr), n(e.n_paths), n(e.n_killed)});
        csv.row(row);

        double ref = 0.0;
        if (boxed) ref = solve_truncated(env, *box, c_.kappa, t, c_.method).log_value(x);
        else ref = solve_untruncated(env, x, c_.kappa, t, c_.tol, c_.method).log_value();
        double z = 0.0;
        if (e.all_killed || std::isinf(ref)) {
          z = (e.all_killed && (std::isinf(ref) || e.n_paths < 1e12)) ? 0.0 : kInf;
        } else if (e.log_stderr > 0.0) {
          z = std::fabs(e.log_mean - ref) / e.log_stderr;
        } else {
          z = std::fabs(e.log_mean - ref) <= 1e-10 * std::max(1.0, std::fabs(ref)) ? 0.0 : kInf;
        }
        worst = std::max(worst, z);
      }
    }
    check("fk-vs-solver", worst <= 3.0, "max |z| " + f(worst));
  }

  void particles() {
    const int box_r = c_.box_radius >= 0 ? c_.box_radius : 4;
    const int L = L0();
    if (L > box_r) throw ConfigError({"L: starting sites must lie in the box (L <= box_radius)"});
    const Environment env = environment(box_r);
    const Box box = Box::centered(c_.dim, box_r);
    const auto xs = sites_of(c_.dim, L);

    auto header = std::vector<std::string>{"t"};
    for (auto& h : site_header(c_.dim)) header.push_back(h);
    header.insert(header.end(), {"run", "zeta", "branch", "death", "jump", "boundary_kill", "truncated"});
    Csv csv(file("runs.csv"), header);

    double worst = 0.0;
    long long truncated = 0;
    for (double t : c_.t_grid) {
      const MomentField m = solve_truncated(env, box, c_.kappa, t, c_.method);
      for (const Site& x : xs) {
        if (env.hard_core(x)) continue;
        std::vector<ParticleState> states(static_cast<std::size_t>(c_.n_runs));
        std::vector<char> cut(states.size());
        parallel_for(states.size(), threads_, [&](std::size_t r) {
          ParticleRun run = gillespie_run(env, box, c_.kappa, t, x, derive_seed(c_.seed, "particles", r));
          cut[r] = run.truncated;
          states[r] = std::move(run.state);
          states[r].eta.clear();
        });
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t r = 0; r < states.size(); ++r) {
          const auto& s = states[r];
          std::vector<std::string> row{f(t)};
          append_site(row, x, c_.dim);
          row.insert(row.end(), {n(r), n(s.zeta), n(s.branch), n(s.death), n(s.jump), n(s.boundary_kill),
                                 n(static_cast<int>(cut[r]))});
          csv.row(row);
          sum += static_cast<double>(s.zeta);
          sum2 += static_cast<double>(s.zeta) * static_cast<double>(s.zeta);
          truncated += cut[r];
        }
        const double nr = static_cast<double>(states.size());
        const double mean = sum / nr;
        const double var = nr > 1 ? std::max(0.0, (sum2 - nr * mean * mean) / (nr - 1)) : 0.0;
        const double se = std::sqrt(var / nr);
        const double ref = std::exp(m.log_value(x));
        const double z = se > 0.0 ? std::fabs(mean - ref) / se : (std::fabs(mean - ref) <= 1e-12 * ref ? 0.0 : kInf);
        worst = std::max(worst, z);
      }
    }
    check("particles-vs-solver", worst <= 3.0, "max |z| " + f(worst));
    check("no-truncated-runs", truncated == 0, n(truncated) + " runs hit the population cap");
  }

  void spectral() {
    const int box_r = c_.box_radius >= 0 ? c_.box_radius : 4;
    const Environment env = environment(box_r);
    const Box box = Box::centered(c_.dim, box_r);
    Csv csv(file("spectrum.csv"), {"k", "lambda_k"});
    std::size_t active = 0;
    for (std::size_t i = 0; i < box.size(); ++i) active += !env.hard_core(box.site(i));
    if (active == 0) return;
    const SpectrumSlice sp = principal_eigen(env, box, c_.kappa, std::min<int>(c_.top_k, static_cast<int>(active)));
    for (std::size_t k = 0; k < sp.eigenvalues.size(); ++k) csv.row({n(k), f(sp.eigenvalues[k])});
    check("residual", sp.residual <= 1e-8 * std::max(1.0, std::fabs(sp.eigenvalues.front())), "residual " + f(sp.residual));
    for (double t : c_.t_grid) {
      const SandwichReport r = verify_sandwich(env, box, c_.kappa, t);
      check("sandwich t=" + f(t), r.lower_ok() && r.upper_ok(),
            "lower margin " + f(r.lower_margin) + ", upper margin " + f(r.upper_margin));
    }
  }

  void exponents() {
    const TailFamily& fam = *c_.family;
    const ExponentTable tab = transition_exponents(fam, c_.dim);
    Csv ex(file("exponents.csv"), {"family", "param", "d", "gamma1", "gamma2", "J", "J_params", "empirical_only", "nu"});
    ex.row({fam.name(), fam.param_string(), n(c_.dim), f(tab.gamma1), f(tab.gamma2), tab.j_name(), tab.j_params(),
            n(static_cast<int>(tab.empirical_only)), f(tab.nu)});

    Csv growth(file("growth.csv"), {"t", "H", "J"});
    std::vector<double> H(c_.t_grid.size());
    for (std::size_t i = 0; i < c_.t_grid.size(); ++i) {
      const double t = c_.t_grid[i];
      H[i] = cumulant_H(fam, t);
      double J = kNaN;
      try {
        J = growth_J(fam, c_.dim, t);
      } catch (const std::exception&) {
      }
      growth.row({f(t), f(H[i]), f(J)});
    }

    Csv gt(file("gtheta.csv"), {"theta", "t", "G"});
    double min_g = kInf;
    for (double th : c_.theta_grid)
      for (double t : c_.t_grid) {
        const double g = cumulant_exponent_G(fam, th, t);
        gt.row({f(th), f(t), f(g)});
        min_g = std::min(min_g, g);
      }
    check("G_theta-nonnegative", min_g >= -1e-9, "min " + f(min_g));

    double worst = kInf;
    for (std::size_t i = 0; i < H.size(); ++i)
      for (std::size_t j = i; j < H.size(); ++j) {
        const double s = c_.t_grid[i] + c_.t_grid[j];
        const double gap = cumulant_H(fam, s) - H[i] - H[j];
        worst = std::min(worst, gap / std::max(1.0, std::fabs(H[i] + H[j])));
      }
    check("H-superadditive", worst >= -1e-9, "min relative gap " + f(worst));

    if (c_.gamma > 0.0 && c_.gamma <= tab.gamma1 && !fam.has_hard_core()) {
      Csv cr(file("critical.csv"), {"gamma", "a"});
      cr.row({f(c_.gamma), f(critical_a(fam, c_.dim, c_.gamma))});
    }
  }

  void exponents_mc() {
    const TailFamily& fam = *c_.family;
    const auto h1 = estimate_H1(fam, c_.kappa, c_.dim, c_.t_grid, c_.replicas, c_.tol, c_.seed, threads_);
    Csv hc(file("h1.csv"), {"t", "replicas", "h1_hat", "ci_lo", "ci_hi", "h_lower", "h_upper", "in_sandwich"});
    for (const auto& e : h1) {
      hc.row({f(e.t), n(e.replicas), f(e.h1_hat), f(e.ci.lo), f(e.ci.hi), f(e.h_lower), f(e.h_upper),
              n(static_cast<int>(e.in_sandwich()))});
      check("annealed-sandwich t=" + f(e.t), e.in_sandwich(),
            f(e.h1_hat) + " in [" + f(e.h_lower) + ", " + f(e.h_upper) + "] +- " + f(e.ci.half_width()));
    }

    const auto ft = estimate_F_theta(fam, c_.kappa, c_.dim, c_.theta_grid, c_.t_grid, c_.replicas, c_.seed, c_.tol, threads_);
    Csv fc(file("ftheta.csv"), {"theta", "t", "f_hat", "ci_lo", "ci_hi", "g_exact"});
    for (const auto& r : ft) fc.row({f(r.theta), f(r.t), f(r.f_hat), f(r.ci.lo), f(r.ci.hi), f(r.g_exact)});

    if (!c_.corr_y.empty()) {
      std::vector<Site> ys;
      for (long long y : c_.corr_y) {
        Site s{};
        s[0] = static_cast<int>(y);
        ys.push_back(s);
      }
      const auto rows = correlation_profile(fam, c_.kappa, c_.dim, t_max(), c_.a, ys, c_.replicas, c_.seed, threads_);
      Csv cc(file("corr.csv"), {"y", "cov", "cov_stderr", "corr", "cov_trunc", "cov_trunc_stderr", "corr_trunc",
                                "disjoint_windows", "exact"});
      for (const auto& r : rows)
        cc.row({n(r.y[0]), f(r.cov), f(r.cov_stderr), f(r.corr), f(r.cov_trunc), f(r.cov_trunc_stderr),
                f(r.corr_trunc), n(static_cast<int>(r.disjoint_windows)), f(r.exact)});
    }

    if (c_.L_prime > 0) {
      const PartitionPlan plan = build_partitions(L0(), c_.L_prime, c_.fine_r, c_.dim);
      std::ofstream js(file("partition.json"), std::ios::binary);
      js << plan.to_json() << '\n';
      if (!js) throw std::runtime_error("write failed: partition.json");
      check("partition", plan.checks.all());
    }
  }

  void regime() {
    RegimeConfig rc;
    rc.family = *c_.family;
    rc.dim = c_.dim;
    rc.kappa = c_.kappa;
    rc.t_grid = c_.t_grid;
    rc.replicas = c_.replicas;
    rc.thresholds = c_.thresholds;
    rc.seed = c_.seed;
    rc.tol = c_.tol;
    rc.max_L = c_.max_L;
    rc.direct_max_sites = c_.direct_max_sites;
    rc.top_k = c_.top_k;
    rc.threads = threads_;
    if (c_.schedule == "explicit") {
      rc.schedule.kind = ScheduleKind::Explicit;
      rc.schedule.explicit_L = c_.L_list;
    } else if (c_.schedule == "f_eps") {
      rc.schedule.kind = ScheduleKind::FEpsilon;
      rc.schedule.f_table = c_.f_eps;
    } else {
      rc.schedule.kind = ScheduleKind::GammaJ;
      rc.schedule.gamma = c_.gamma;
    }

    std::vector<RegimeVerdict> vs;
    if (c_.experiment == "lln") vs = lln_experiment(rc);
    else if (c_.experiment == "clt") vs = clt_experiment(rc);
    else vs = critical_experiment(rc, c_.gamma, c_.delta);

    Csv csv(file("regime.csv"), {"family", "kappa", "d", "t", "L", "gamma", "gamma1", "gamma2", "frac_in_band",
                                 "skew", "kurt", "ks_p", "verdict"});
    for (const auto& v : vs) {
      csv.row({v.family, f(v.kappa), n(v.dim), f(v.t), n(v.L), f(v.gamma), f(v.gamma1), f(v.gamma2),
               f(v.frac_in_band), f(v.stat_skew), f(v.stat_exkurt), f(v.ks_p), classification_name(v.classification)});
      std::string detail = "L=" + n(v.L) + " sampler=" + v.sampler + " in_band=" + f(v.frac_in_band) +
                           " below_half=" + f(v.frac_below_half);
      if (c_.experiment == "clt")
        detail += " skew=" + f(v.stat_skew) + " exkurt=" + f(v.stat_exkurt) + " ks_p=" + f(v.ks_p) +
                  " median|Z|=" + f(v.median_abs_stat);
      if (c_.experiment == "critical") detail += " below_normalizer=" + f(v.frac_below_normalizer);
      check(c_.experiment + " t=" + f(v.t) + ": " + classification_name(v.classification), v.passed, detail);
    }
  }

  void write_summary() {
    json cfg = json::object();
    for (const auto& [k, v] : normalized_pairs(c_)) cfg[k] = v;
    json checks = json::array();
    for (const auto& ch : report_.checks)
      checks.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
    json doc = {{"version", version_string()},
                {"subcommand", c_.subcommand},
                {"config", cfg},
                {"files", report_.files},
                {"checks", checks},
                {"all_passed", report_.all_passed()},
                {"timings", {{"wall_seconds", report_.seconds}, {"threads", threads_}}}};
    std::ofstream out(dir_ / "summary.json", std::ios::binary);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + (dir_ / "summary.json").string());
    report_.files.push_back("summary.json");
  }
};

}  // namespace

RunReport run_subcommand(const RunConfig& cfg) { return Runner(cfg).run(); }

}  // namespace brwre
