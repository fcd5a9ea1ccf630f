#include <deque>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "config.hpp"
#include "g2glue/errors.hpp"
#include "g2glue/parallel.hpp"
#include "report.hpp"
#include "suites.hpp"

namespace {

using namespace g2glue;
using namespace g2glue::cli;

enum Exit { kOk = 0, kSuiteFail = 1, kInvalidConfig = 2, kIoError = 3 };

/// Command-line values bound to configuration keys; applied after the file so flags win.
class Overrides {
 public:
  void option(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto& b = bindings_.emplace_back(Binding{key, {}, nullptr});
    b.option = app->add_option(flag, b.value, help);
  }
  void flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& value,
            const std::string& help) {
    auto& b = bindings_.emplace_back(Binding{key, value, nullptr});
    b.option = app->add_flag(flag, help);
  }
  void apply(RunConfig& cfg) const {
    for (const auto& b : bindings_)
      if (b.option->count() > 0) set_value(cfg, b.key, b.value, "option " + b.option->get_name());
  }

 private:
  struct Binding {
    std::string key;
    std::string value;
    CLI::Option* option;
  };
  std::deque<Binding> bindings_;
};

struct Command {
  CLI::App* app;
  Report (*run)(const RunConfig&);
};

int run_report(const Report& rep, const RunConfig& cfg, bool quiet) {
  if (!quiet) std::cout << summary(rep);
  for (const auto& p : write_outputs(rep, cfg.output))
    if (!quiet) std::cout << "wrote " << p.string() << '\n';
  return rep.ok() ? kOk : kSuiteFail;
}

int run_acceptance(const RunConfig& cfg, bool quiet) {
  const Report rep = acceptance([quiet](const Check& c, double) {
    if (quiet) return;
    const char* tag = c.status == Status::Pass ? "PASS" : c.status == Status::Fail ? "FAIL" : "INFO";
    std::cout << "[" << tag << "] " << c.name;
    if (c.status == Status::Reported) std::cout << ": " << c.measured.dump();
    if (c.status == Status::Fail) std::cout << " (violates: " << c.anchor << ")";
    std::cout << std::endl;
  });
  for (const auto& p : write_outputs(rep, cfg.output))
    if (!quiet) std::cout << "wrote " << p.string() << '\n';
  if (!quiet) std::cout << "all: " << (rep.ok() ? "pass" : "fail") << '\n';
  return rep.ok() ? kOk : kSuiteFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for G2-structures glued from Eguchi-Hanson spaces on T^7/Z2^3", "g2glue"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", G2GLUE_VERSION);

  std::string config_path;
  bool quiet = false;
  Overrides ov;
  app.add_option("-c,--config", config_path, "configuration file (key = value lines under [section] headers)");
  ov.option(&app, "-o,--output", "output.path", "output prefix; writes PREFIX.json and/or PREFIX[.table].csv");
  ov.option(&app, "--format", "output.format", "json, csv or both");
  app.add_flag("-q,--quiet", quiet, "suppress the human-readable summary");

  std::vector<Command> commands;

  CLI::App* eh = app.add_subcommand("eh", "Eguchi-Hanson identities and decay");
  eh->require_subcommand(1);
  CLI::App* eh_v = eh->add_subcommand("verify", "closedness and duality identities at random (k, r)");
  ov.option(eh_v, "--samples", "eh.samples", "number of random (k, r) points");
  ov.option(eh_v, "--seed", "eh.seed", "random seed");
  ov.option(eh_v, "--t", "eh.t", "gluing scale of the rescaling check");
  commands.push_back({eh_v, &eh_verify});
  CLI::App* eh_d = eh->add_subcommand("decay", "ALE decay of tau1 and the decay rate of nu");
  ov.option(eh_d, "--k-list", "eh.k_list", "comma-separated k values in (0, 1]");
  ov.option(eh_d, "--r-min", "eh.r_min", "smallest radius (> 1)");
  ov.option(eh_d, "--r-max", "eh.r_max", "largest radius");
  ov.option(eh_d, "--grid", "eh.grid", "number of geometric grid points");
  commands.push_back({eh_d, &eh_decay});

  CLI::App* cone = app.add_subcommand("cone", "critical rates on the cone over SO(3) or S^3");
  cone->require_subcommand(1);
  CLI::App* cone_r = cone->add_subcommand("rates", "critical rates in the open window (from, to)");
  ov.option(cone_r, "--link", "cone.link", "so3 or s3");
  ov.option(cone_r, "--degree", "cone.degree", "form degree 0..4");
  ov.option(cone_r, "--from", "cone.from", "window start (rational)");
  ov.option(cone_r, "--to", "cone.to", "window end (rational)");
  ov.option(cone_r, "--ceiling", "cone.ceiling", "link eigenvalue ceiling");
  commands.push_back({cone_r, &cone_rates});
  CLI::App* cone_i = cone->add_subcommand("index", "index change of the weighted Laplacian between two rates");
  ov.option(cone_i, "--link", "cone.link", "so3 or s3");
  ov.option(cone_i, "--degree", "cone.degree", "form degree 0..4");
  ov.option(cone_i, "--from", "cone.index_from", "lower non-critical rate");
  ov.option(cone_i, "--to", "cone.index_to", "upper non-critical rate");
  ov.option(cone_i, "--ceiling", "cone.ceiling", "link eigenvalue ceiling");
  commands.push_back({cone_i, &cone_index});
  CLI::App* cone_o = cone->add_subcommand("oracle", "exact polynomial checks on S^3 and R^4");
  commands.push_back({cone_o, &cone_oracle});

  CLI::App* rates = app.add_subcommand("rates", "exact torsion-rate calculator");
  rates->require_subcommand(1);
  CLI::App* rates_j = rates->add_subcommand("jk", "weighted torsion exponents of the glued and corrected structures");
  ov.option(rates_j, "--beta", "rates.beta", "weight rate: -eps or a rational in (-4, 0)");
  ov.option(rates_j, "--alpha", "rates.alpha", "Hoelder exponent: eps or a rational in (0, 1)");
  ov.option(rates_j, "--B", "rates.b", "interpolation parameter in [-1, 0]");
  commands.push_back({rates_j, &rates_jk});

  CLI::App* kummer = app.add_subcommand("kummer", "the orbifold T^7/Gamma and its resolution");
  kummer->require_subcommand(1);
  CLI::App* kummer_f = kummer->add_subcommand("fixed-points", "fixed-point sets and singular components");
  commands.push_back({kummer_f, &kummer_fixed_points});
  CLI::App* kummer_t = kummer->add_subcommand("torsion", "torsion decay of the glued structure");
  ov.option(kummer_t, "--t-list", "kummer.t_list", "comma-separated gluing parameters in (0, 0.3]");
  ov.option(kummer_t, "--samples", "kummer.samples", "annulus samples per t");
  ov.option(kummer_t, "--beta", "kummer.beta", "weight rate in (-4, 0)");
  ov.option(kummer_t, "--alpha", "kummer.alpha", "Hoelder exponent in (0, 1)");
  ov.option(kummer_t, "--seed", "kummer.seed", "random seed");
  ov.option(kummer_t, "--b2", "kummer.b2", "second Betti number of the orbifold");
  commands.push_back({kummer_t, &kummer_torsion});

  CLI::App* torus = app.add_subcommand("torus", "torsion-free perturbation on the flat 7-torus");
  torus->require_subcommand(1);
  CLI::App* torus_s = torus->add_subcommand("solve", "solve d Theta(phi + d eta) = 0 for phi = phi0 + eps d sigma");
  ov.option(torus_s, "--n", "torus.n", "grid points per axis: 4, 6 or 8");
  ov.option(torus_s, "--eps", "torus.eps", "perturbation size in [0, 0.5]");
  ov.option(torus_s, "--seed", "torus.seed", "random seed of sigma");
  ov.option(torus_s, "--tol", "torus.tol", "residual tolerance");
  ov.option(torus_s, "--max-iter", "torus.max_iter", "iteration cap");
  ov.option(torus_s, "--mode", "torus.mode", "flat or cg");
  ov.flag(torus_s, "--no-fallback", "torus.fallback", "false", "do not switch to cg when the flat iteration stalls");
  ov.option(torus_s, "--dump", "torus.dump", "write phi~ as a binary field dump to this path");
  commands.push_back({torus_s, &torus_solve});

  CLI::App* all = app.add_subcommand("all", "full acceptance run with pinned parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalidConfig;
  }

  try {
    apply_thread_limit_from_env();
    RunConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
    ov.apply(cfg);
    validate(cfg);
    if (all->parsed()) return run_acceptance(cfg, quiet);
    for (const auto& c : commands)
      if (c.app->parsed()) return run_report(c.run(cfg), cfg, quiet);
    std::cerr << app.help();
    return kInvalidConfig;
  } catch (const ConfigError& e) {
    std::cerr << "g2glue: invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const IoError& e) {
    std::cerr << "g2glue: I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const DomainError& e) {
    std::cerr << "g2glue: invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "g2glue: " << e.what() << '\n';
    return kSuiteFail;
  }
}
