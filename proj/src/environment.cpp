#include "brwre/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "brwre/log_math.hpp"
#include "brwre/rng.hpp"

namespace brwre {

namespace {


std::uint64_t site_key(const Site& s, int dim) {
  std::uint64_t h = static_cast<std::uint64_t>(dim);
  for (int k = 0; k < dim; ++k)
    h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(s[k])));
  return h;
}

std::string fmt17(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

Environment::Environment(Box window, std::vector<double> v_minus, std::vector<double> v_plus,
                         std::vector<std::uint8_t> hard_core,
                         std::optional<EnvProvenance> provenance)
    : window_(window),
      v_minus_(std::move(v_minus)),
      v_plus_(std::move(v_plus)),
      hard_core_(std::move(hard_core)),
      provenance_(std::move(provenance)) {
  const std::size_t n = window_.size();
  if (v_minus_.size() != n || v_plus_.size() != n || hard_core_.size() != n)
    throw std::invalid_argument("environment arrays do not match the window size");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(v_plus_[i] >= 0.0) || !std::isfinite(v_plus_[i]))
      throw std::invalid_argument("v_plus must be finite and >= 0");
    if (hard_core_[i]) {
      v_minus_[i] = 0.0;
    } else if (!(v_minus_[i] >= 0.0) || !std::isfinite(v_minus_[i])) {
      throw std::invalid_argument("finite v_minus must be >= 0 (use the hard-core flag for inf)");
    }
  }
}

Environment Environment::from_potential(Box window, const std::vector<double>& v) {
  const std::size_t n = window.size();
  if (v.size() != n) throw std::invalid_argument("potential size does not match window");
  std::vector<double> vm(n, 0.0), vp(n, 0.0);
  std::vector<std::uint8_t> hc(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] == kNegInf) {
      hc[i] = 1;
    } else if (v[i] >= 0.0) {
      vp[i] = v[i];
    } else {
      vm[i] = -v[i];
    }
  }
  return Environment(window, std::move(vm), std::move(vp), std::move(hc));
}

Environment Environment::constant(int dim, int radius, double c) {
  const Box w = Box::centered(dim, radius);
  return from_potential(w, std::vector<double>(w.size(), c));
}

double Environment::v_minus(std::size_t i) const { return hard_core_[i] ? kInf : v_minus_[i]; }

double Environment::v(std::size_t i) const {
  return hard_core_[i] ? kNegInf : v_plus_[i] - v_minus_[i];
}

std::size_t Environment::hard_core_count() const {
  std::size_t c = 0;
  for (auto f : hard_core_) c += f;
  return c;
}

double sample_site_potential(const TailFamily& family, const Site& site, int dim, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "env", site_key(site, dim)));
  // Exponential level: -log U stays accurate far out in the upper tail.
  const double level = -std::log(rng.uniform());
  return quantile_at_level(family, level);
}

Environment sample_environment(const TailFamily& family, int dim, int radius, std::uint64_t seed,
                               double baseline_death) {
  if (radius < 0) throw std::invalid_argument("radius must be >= 0");
  if (!(baseline_death >= 0.0) || !std::isfinite(baseline_death))
    throw std::invalid_argument("baseline death rate must be finite and >= 0");
  const Box w = Box::centered(dim, radius);
  const std::size_t n = w.size();
  std::vector<double> vm(n, 0.0), vp(n, 0.0);
  std::vector<std::uint8_t> hc(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = sample_site_potential(family, w.site(i), dim, seed);
    if (v == kNegInf) {
      hc[i] = 1;
      continue;
    }
    vp[i] = std::max(v, 0.0) + baseline_death;
    vm[i] = std::max(-v, 0.0) + baseline_death;
  }
  return Environment(w, std::move(vm), std::move(vp), std::move(hc),
                     EnvProvenance{family, seed, baseline_death});
}

EffectivePotential effective_potential(const Environment& env) {
  EffectivePotential out{env.window(), std::vector<double>(env.size())};
  for (std::size_t i = 0; i < env.size(); ++i) out.v[i] = env.v(i);
  return out;
}

Environment clip_branching(const Environment& env, double vmax) {
  if (!(vmax >= 0.0)) throw std::invalid_argument("vmax must be >= 0");
  std::vector<double> vm(env.size()), vp(env.size());
  std::vector<std::uint8_t> hc(env.size());
  for (std::size_t i = 0; i < env.size(); ++i) {
    vm[i] = env.v_minus_finite(i);
    vp[i] = std::min(env.v_plus(i), vmax);
    hc[i] = env.hard_core(i) ? 1 : 0;
  }
  return Environment(env.window(), std::move(vm), std::move(vp), std::move(hc));
}

Environment restrict_environment(const Environment& env, const Box& sub) {
  if (!env.window().contains(sub)) throw std::invalid_argument("sub-box is not inside the window");
  const std::size_t n = sub.size();
  std::vector<double> vm(n), vp(n);
  std::vector<std::uint8_t> hc(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = env.window().index(sub.site(i));
    vm[i] = env.v_minus_finite(j);
    vp[i] = env.v_plus(j);
    hc[i] = env.hard_core(j) ? 1 : 0;
  }
  return Environment(sub, std::move(vm), std::move(vp), std::move(hc), env.provenance());
}

void write_environment_csv(const Environment& env, std::ostream& out) {
  const int d = env.dim();
  for (int k = 0; k < d; ++k) out << 'x' << k << ',';
  out << "v_minus,v_plus,hardcore\n";
  for (std::size_t i = 0; i < env.size(); ++i) {
    const Site s = env.window().site(i);
    for (int k = 0; k < d; ++k) out << s[k] << ',';
    if (env.hard_core(i))
      out << "inf";
    else
      out << fmt17(env.v_minus_finite(i));
    out << ',' << fmt17(env.v_plus(i)) << ',' << (env.hard_core(i) ? 1 : 0) << '\n';
  }
}

std::string environment_header_json(const Environment& env) {
  nlohmann::ordered_json j;
  if (const auto& p = env.provenance()) {
    j["family"] = p->family.name();
    j["params"] = nlohmann::ordered_json::object();
    if (p->family.kind() == TailKind::HardCore)
      j["params"]["p"] = p->family.param();
    else if (p->family.kind() != TailKind::SquaredDoubleExp)
      j["params"]["rho"] = p->family.param();
    j["seed"] = p->seed;
    j["baseline_death"] = p->baseline_death;
  } else {
    j["family"] = nullptr;
    j["params"] = nlohmann::ordered_json::object();
    j["seed"] = nullptr;
  }
  j["dim"] = env.dim();
  j["radius"] = env.radius();
  return j.dump(2) + "\n";
}

void save_environment(const Environment& env, const std::filesystem::path& csv_path,
                      const std::filesystem::path& json_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot open " + csv_path.string() + " for writing");
  write_environment_csv(env, csv);
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw std::runtime_error("cannot open " + json_path.string() + " for writing");
  js << environment_header_json(env);
}

Environment load_environment(const std::filesystem::path& csv_path,
                             const std::filesystem::path& json_path) {
  std::ifstream js(json_path);
  if (!js) throw std::runtime_error("cannot open " + json_path.string());
  const auto header = nlohmann::json::parse(js);
  const int dim = header.at("dim").get<int>();
  const int radius = header.at("radius").get<int>();
  std::optional<EnvProvenance> prov;
  if (!header.at("family").is_null()) {
    const auto& params = header.at("params");
    double param = 0.0;
    if (params.contains("rho")) param = params["rho"].get<double>();
    if (params.contains("p")) param = params["p"].get<double>();
    prov = EnvProvenance{TailFamily::parse(header["family"].get<std::string>(), param),
                         header.at("seed").get<std::uint64_t>(),
                         header.value("baseline_death", 0.0)};
  }

  const Box w = Box::centered(dim, radius);
  const std::size_t n = w.size();
  std::vector<double> vm(n, 0.0), vp(n, 0.0);
  std::vector<std::uint8_t> hc(n, 0);
  std::vector<bool> seen(n, false);

  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path.string());
  std::string line;
  std::getline(csv, line);  // header
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Site s;
    for (int k = 0; k < dim; ++k) {
      std::getline(ss, cell, ',');
      s[k] = std::stoi(cell);
    }
    if (!w.contains(s)) throw std::runtime_error("env.csv: site outside the declared window");
    const std::size_t i = w.index(s);
    if (seen[i]) throw std::runtime_error("env.csv: duplicate site");
    std::string vm_s, vp_s, hc_s;
    std::getline(ss, vm_s, ',');
    std::getline(ss, vp_s, ',');
    std::getline(ss, hc_s, ',');
    hc[i] = static_cast<std::uint8_t>(std::stoi(hc_s) != 0);
    vm[i] = hc[i] ? 0.0 : std::stod(vm_s);
    vp[i] = std::stod(vp_s);
    seen[i] = true;
    ++rows;
  }
  if (rows != n) throw std::runtime_error("env.csv: expected " + std::to_string(n) + " rows, got " +
                                          std::to_string(rows));
  return Environment(w, std::move(vm), std::move(vp), std::move(hc), prov);
}

}  // namespace brwre
