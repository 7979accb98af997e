// complab: batch front end for the completeness toolkit.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "complab/report.hpp"

namespace {

struct Options {
  std::string config;
  std::string out = "complab_out";
  std::optional<double> t_max;
  std::optional<double> xi_cap;
  std::optional<int> series_order;
  std::optional<unsigned> seed;
};

void add_common(CLI::App* sub, Options& o, bool needs_config) {
  auto* cfg = sub->add_option("--config", o.config, "job config (JSON)");
  if (needs_config) cfg->required();
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--t-max", o.t_max, "integration horizon");
  sub->add_option("--xi-cap", o.xi_cap, "largest |xi| cap for blowup detection");
  sub->add_option("--series-order", o.series_order, "Frobenius truncation order N");
  sub->add_option("--seed", o.seed, "probe seed");
}

void configure_logging() {
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("COMPLAB_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
  spdlog::set_pattern("[%l] %v");
}

int run_job(const Options& o, std::optional<std::set<complab::Pipeline>> pipelines) {
  auto overrides = [&](complab::JobConfig& c) {
    if (o.t_max) c.controls.t_max = *o.t_max;
    if (o.xi_cap) c.controls.xi_cap = *o.xi_cap;
    if (o.series_order) c.controls.series_order = *o.series_order;
    if (o.seed) c.controls.seed = *o.seed;
  };
  const complab::RunOutcome r = complab::run_file(o.config, o.out, pipelines, overrides);
  const complab::JobReport& rep = r.report;
  std::cout << rep.name << ": ";
  if (rep.classification)
    std::cout << "classical=" << rep.classification->classical << " quantum=" << rep.classification->quantum << ' ';
  if (rep.agreement) std::cout << "agreement=" << *rep.agreement << ' ';
  if (rep.deficiency) std::cout << "n+=" << rep.deficiency->n_plus << " n-=" << rep.deficiency->n_minus << ' ';
  if (rep.degree1) std::cout << "esa=" << rep.degree1->esa << ' ';
  if (rep.lorentz && rep.lorentz->geodesic) std::cout << "geodesic=" << rep.lorentz->geodesic->status << ' ';
  if (!rep.errors.empty()) std::cout << "errors=" << rep.errors.size() << ' ';
  std::cout << "-> " << (std::filesystem::path(o.out) / "report.json").string() << '\n';
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Completeness and essential self-adjointness of degenerate Sturm-Liouville operators"};
  app.require_subcommand(1);

  Options o;
  struct Sub {
    const char* name;
    const char* help;
    std::optional<complab::Pipeline> pipeline;
  };
  const Sub subs[] = {
      {"classify", "zero-by-zero classifier verdicts", complab::Pipeline::Classify},
      {"flow", "Hamiltonian blowup probes", complab::Pipeline::Flow},
      {"frobenius", "local series at every zero", complab::Pipeline::Frobenius},
      {"deficiency", "limit point / limit circle and deficiency estimates", complab::Pipeline::Deficiency},
      {"crosscheck", "classifier vs flow vs deficiency agreement", complab::Pipeline::Crosscheck},
      {"lorentz", "Lorentz surface job with every pipeline in the config", std::nullopt},
  };
  std::optional<complab::Pipeline> chosen;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, o, true);
    sub->callback([&chosen, p = s.pipeline] { chosen = p; });
  }
  CLI::App* gal = app.add_subcommand("gallery", "write the built-in example configs");
  gal->add_option("--out", o.out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gal->parsed()) {
      for (const auto& p : complab::gallery(o.out)) std::cout << p.string() << '\n';
      return 0;
    }
    if (app.got_subcommand("lorentz")) return run_job(o, std::nullopt);
    return run_job(o, std::set<complab::Pipeline>{*chosen});
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 3;
  }
}
