// brwre: command-line front end. Exit code 0 iff every check of the run passed.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "brwre/cli_io.hpp"

namespace {

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  int threads = -1;
};

int run(const std::string& subcommand, const Options& o) {
  std::string text;
  if (!o.config.empty()) {
    std::ifstream in(o.config, std::ios::binary);
    if (!in) {
      std::cerr << "cannot open config " << o.config << "\n";
      return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  std::vector<std::string> overrides = o.sets;
  overrides.push_back("subcommand=" + subcommand);
  if (!o.out.empty()) overrides.push_back("out=" + o.out);
  if (o.threads >= 0) overrides.push_back("threads=" + std::to_string(o.threads));

  brwre::RunConfig cfg;
  try {
    cfg = brwre::parse_config(text, overrides);
  } catch (const brwre::ConfigError& e) {
    for (const auto& err : e.errors()) std::cerr << "config: " << err << "\n";
    return 2;
  }
  try {
    const brwre::RunReport rep = brwre::run_subcommand(cfg);
    for (const auto& c : rep.checks)
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
    std::cout << "wrote " << rep.files.size() << " files to " << cfg.out << " in " << rep.seconds << " s\n";
    return rep.all_passed() ? 0 : 1;
  } catch (const brwre::ConfigError& e) {
    for (const auto& err : e.errors()) std::cerr << "config: " << err << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branching random walks in random environment: solvers, oracles and regime experiments"};
  app.set_version_flag("--version", std::string(brwre::version_string()));
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> subs{
      {"sample-env", "sample an environment window (env.csv, env.json)"},
      {"solve", "first moment m(x,t) on Lambda_L (moments.csv)"},
      {"fk", "Feynman-Kac path estimate vs the solver (fk.csv)"},
      {"particles", "Gillespie particle runs vs the solver (runs.csv)"},
      {"spectral-check", "principal spectrum and the eigenvalue sandwich (spectrum.csv)"},
      {"exponents", "transition exponents, H, J and G_theta (exponents.csv, growth.csv, gtheta.csv)"},
      {"exponents-mc", "Monte Carlo H_1, F_theta, correlations, partitions"},
      {"regime", "law-of-large-numbers / CLT / critical experiments (regime.csv)"},
  };
  std::vector<Options> opts(subs.size());
  std::vector<CLI::App*> apps;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    CLI::App* sc = app.add_subcommand(subs[i].first, subs[i].second);
    sc->add_option("--config,-c", opts[i].config, "key = value config file")->check(CLI::ExistingFile);
    sc->add_option("--set,-s", opts[i].sets, "override a config key (key=value), repeatable");
    sc->add_option("--out,-o", opts[i].out, "output directory");
    sc->add_option("--threads,-j", opts[i].threads, "worker threads (0: BRWRE_THREADS or all cores)");
    apps.push_back(sc);
  }
  CLI11_PARSE(app, argc, argv);
  for (std::size_t i = 0; i < apps.size(); ++i)
    if (apps[i]->parsed()) return run(subs[i].first, opts[i]);
  return 2;
}
