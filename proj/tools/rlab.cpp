// Command-line front end: model caching, one-off norms, estimate
// verification, sweeps, perturbation runs and report conversion.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rlab/error.hpp"
#include "rlab/serialization.hpp"
#include "rlab/sweep.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailure = 1;
constexpr int kUsage = 2;
constexpr int kNumerical = 3;

constexpr const char* kCacheEnv = "RLAB_CACHE_DIR";

struct ModelOptions {
  rlab::ModelSpec spec;
  void add(CLI::App* app) {
    app->add_option("--kind", spec.kind, "torus | sphere | rough | random | file")->capture_default_str();
    app->add_option("--n", spec.n, "torus dimension")->capture_default_str();
    app->add_option("--K", spec.K, "torus lattice cutoff")->capture_default_str();
    app->add_option("--G", spec.G, "torus grid points per axis (0: 4K+1)")->capture_default_str();
    app->add_option("--L", spec.sphere.L_max, "sphere degree cutoff")->capture_default_str();
    app->add_option("--n-theta", spec.sphere.n_theta, "sphere colatitude nodes")->capture_default_str();
    app->add_option("--n-phi", spec.sphere.n_phi, "sphere longitude nodes")->capture_default_str();
    app->add_option("--N", spec.rough.N, "rough grid points per axis")->capture_default_str();
    app->add_option("--rough-dim", spec.rough.dim, "rough model dimension")->capture_default_str();
    app->add_option("--s", spec.rough.s, "rough coefficient regularity")->capture_default_str();
    app->add_option("--delta", spec.rough.delta, "rough coefficient amplitude")->capture_default_str();
    app->add_option("--dim", spec.dim, "random model dimension")->capture_default_str();
    app->add_option("--tau-max", spec.tau_max, "random model spectral range")->capture_default_str();
    app->add_option("--seed", spec.seed, "random model seed")->capture_default_str();
    app->add_option("--path", spec.path, "operator JSON (kind=file)");
  }
  // Sphere grids follow the cutoff unless set explicitly.
  void finalize() {
    if (spec.kind == "sphere") {
      spec.sphere.n_theta = std::max(spec.sphere.n_theta, spec.sphere.L_max + 1);
      spec.sphere.n_phi = std::max(spec.sphere.n_phi, 2 * spec.sphere.L_max + 1);
    }
  }
};

std::string cache_dir() {
  const char* env = std::getenv(kCacheEnv);
  return env && *env ? env : ".rlab-cache";
}

void write_or_print(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral cluster and resolvent estimate laboratory"};
  app.require_subcommand(1);

  // model build|cache
  auto* model_cmd = app.add_subcommand("model", "build or cache a model operator");
  model_cmd->require_subcommand(1);
  ModelOptions build_opts, cache_opts;
  std::string build_out;
  auto* build_cmd = model_cmd->add_subcommand("build", "build a model and write its operator JSON");
  build_opts.add(build_cmd);
  build_cmd->add_option("--out,-o", build_out, "output file (default stdout)");
  auto* cache_cmd = model_cmd->add_subcommand("cache", "build a model into the cache directory unless present");
  cache_opts.add(cache_cmd);

  // norms
  ModelOptions norm_opts;
  std::string quantity = "cluster-2q";
  double q = 6.0, lambda = 4.0, eps = 1.0, mu = 1.0;
  auto* norms_cmd = app.add_subcommand("norms", "measure one quantity at one point");
  norm_opts.add(norms_cmd);
  norms_cmd->add_option("--quantity", quantity, "cluster-2q | resolvent-q'q | resolvent-2q | im-resolvent")
      ->capture_default_str();
  norms_cmd->add_option("--q", q, "target exponent (inf allowed)")->capture_default_str();
  norms_cmd->add_option("--lambda", lambda)->capture_default_str();
  norms_cmd->add_option("--eps", eps)->capture_default_str();
  norms_cmd->add_option("--mu", mu)->capture_default_str();

  // verify
  std::string estimate = "all";
  rlab::CorpusSpec corpus;
  auto* verify_cmd = app.add_subcommand("verify", "check the abstract estimates on a seeded random corpus");
  verify_cmd->add_option("--estimate", estimate, "3.3 .. 3.8 | L3.1 | C3.4 | all")->capture_default_str();
  verify_cmd->add_option("--models", corpus.models)->capture_default_str();
  verify_cmd->add_option("--seed", corpus.seed)->capture_default_str();
  verify_cmd->add_option("--max-dim", corpus.max_dim)->capture_default_str();

  // sweep
  std::string sweep_config, sweep_out = "sweep-report.json", sweep_format = "json";
  auto* sweep_cmd = app.add_subcommand("sweep", "run a configured sweep and fit scaling exponents");
  sweep_cmd->add_option("--config", sweep_config, "YAML or JSON config")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--out,-o", sweep_out, "output path")->capture_default_str();
  sweep_cmd->add_option("--format", sweep_format, "csv | json | plotdata")->capture_default_str();

  // perturb
  std::string perturb_config, perturb_out;
  auto* perturb_cmd = app.add_subcommand("perturb", "run the perturbation stability pipeline");
  perturb_cmd->add_option("--config", perturb_config, "YAML or JSON config")->required()->check(CLI::ExistingFile);
  perturb_cmd->add_option("--out,-o", perturb_out, "output file (default stdout)");

  // report
  std::string report_in, report_out, report_format = "csv";
  auto* report_cmd = app.add_subcommand("report", "convert a JSON report");
  report_cmd->add_option("--in", report_in, "report JSON")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--format", report_format, "csv | json | plotdata")->capture_default_str();
  report_cmd->add_option("--out,-o", report_out, "output path (plotdata: directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (build_cmd->parsed()) {
      build_opts.finalize();
      const auto model = rlab::build_model(build_opts.spec);
      write_or_print(rlab::operator_to_json(*model.op) + "\n", build_out);
      return kPass;
    }
    if (cache_cmd->parsed()) {
      cache_opts.finalize();
      const std::filesystem::path dir = cache_dir();
      std::filesystem::create_directories(dir);
      const auto path = dir / (cache_opts.spec.key() + ".json");
      if (!std::filesystem::exists(path)) rlab::save_operator(*rlab::build_model(cache_opts.spec).op, path.string());
      std::cout << path.string() << "\n";
      return kPass;
    }
    if (norms_cmd->parsed()) {
      norm_opts.finalize();
      const auto model = rlab::build_model(norm_opts.spec);
      const auto b = rlab::measure(model, rlab::parse_quantity(quantity), q, lambda, eps, mu);
      // JSON has no infinity; reports spell it "inf" as well.
      const nlohmann::json qj = std::isinf(q) ? nlohmann::json("inf") : nlohmann::json(q);
      const nlohmann::json line{{"model", model.label}, {"quantity", quantity}, {"q", qj},  {"lambda", lambda},
                                {"eps", eps},          {"mu", mu},             {"lower", b.lower},
                                {"upper", b.upper},    {"method", b.method}};
      std::cout << line.dump() << "\n";
      return kPass;
    }
    if (verify_cmd->parsed()) {
      bool ok = true;
      for (const auto& c : rlab::verify_corpus(estimate, corpus)) {
        std::cout << rlab::check_to_json(c) << "\n";
        ok = ok && c.pass;
      }
      return ok ? kPass : kCheckFailure;
    }
    if (sweep_cmd->parsed()) {
      const auto cfg = rlab::load_sweep_config(sweep_config);
      rlab::Report report;
      report.config_json = rlab::sweep_config_json(cfg);
      report.records = rlab::run_sweep(cfg);
      for (const auto& s : rlab::series(report.records)) {
        if (s.size() >= 3) report.fits.push_back(rlab::fit_slope(s));
      }
      for (const auto& f : rlab::emit(report, rlab::parse_format(sweep_format), sweep_out)) std::cout << f << "\n";
      for (const auto& f : report.fits) {
        std::cout << f.model << " " << f.quantity << " q=" << f.q << " slope=" << f.slope << " nu=" << f.nu << "\n";
      }
      return kPass;
    }
    if (perturb_cmd->parsed()) {
      const auto [text, ok] = rlab::run_perturb(rlab::load_perturb_config(perturb_config));
      write_or_print(text, perturb_out);
      return ok ? kPass : kCheckFailure;
    }
    if (report_cmd->parsed()) {
      const auto report = rlab::load_report(report_in);
      const auto format = rlab::parse_format(report_format);
      if (report_out.empty()) {
        if (format == rlab::ReportFormat::Csv) {
          std::cout << rlab::records_csv(report.records);
        } else if (format == rlab::ReportFormat::Json) {
          std::cout << rlab::report_json(report);
        } else {
          throw rlab::DomainError("plotdata output needs --out DIR");
        }
      } else {
        for (const auto& f : rlab::emit(report, format, report_out)) std::cout << f << "\n";
      }
      return kPass;
    }
  } catch (const rlab::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const rlab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
