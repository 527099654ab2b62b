// geostein: convergence experiments for Stein-kernel cubature on the sphere.
//
//   geostein run --kernel k1:alpha=3.5 --target vmf:0,0,2 --points riesz \
//       --n-grid 50,100,200,400,800 --seeds 0..9 --integrand rosenbrock \
//       --out results.csv [--emit-svg fig.svg] [--sigma 1000]
//   geostein points --points riesz --n 200 --seed 0 --out pts.txt
//
// Exit codes: 0 success, 2 configuration error, 3 when all sweep cells failed.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geostein/experiment.hpp"

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  const auto range = spec.find("..");
  if (range != std::string::npos) {
    const std::uint64_t lo = std::stoull(spec.substr(0, range));
    const std::uint64_t hi = std::stoull(spec.substr(range + 2));
    if (hi < lo) throw geostein::ConfigError("seeds: descending range");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  for (const auto& part : geostein::detail::split(spec, ',')) {
    seeds.push_back(std::stoull(part));
  }
  if (seeds.empty()) throw geostein::ConfigError("seeds: empty");
  return seeds;
}

std::vector<int> parse_n_grid(const std::string& spec) {
  std::vector<int> ns;
  for (const auto& part : geostein::detail::split(spec, ',')) ns.push_back(std::stoi(part));
  return ns;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stein-kernel cubature experiments on S^2"};
  app.require_subcommand(1);

  // --- run ---
  auto* run = app.add_subcommand("run", "run a convergence sweep and write CSV records");
  std::string kernelSpec, targetSpec = "vmf:0,0,2", pointRegime = "fibonacci";
  std::string nGridSpec = "50,100,200,400,800", seedsSpec = "0";
  std::string integrand = "rosenbrock", outPath, svgPath, pointsDir, interpPath;
  double sigma = 0.0;
  int burnIn = -1, rieszIters = 500, interpN = 200;
  run->add_option("--kernel", kernelSpec, "kernel spec, e.g. k1:alpha=3.5 | k2:alpha=5.5,lambda=1 | k3:j=2,lambda=2")
      ->required();
  run->add_option("--target", targetSpec, "target spec vmf:<c1>,<c2>,<c3>");
  run->add_option("--points", pointRegime, "point regime: fibonacci|riesz|iid|mcmc");
  run->add_option("--n-grid", nGridSpec, "comma-separated point counts, strictly increasing");
  run->add_option("--seeds", seedsSpec, "seed list '0,1,2' or range '0..9'");
  run->add_option("--integrand", integrand, "integrand: rosenbrock|linear|constant");
  run->add_option("--out", outPath, "output CSV path")->required();
  run->add_option("--emit-svg", svgPath, "write a log-log KSD plot to this SVG path");
  run->add_option("--sigma", sigma, "finite sigma estimator (default: limit form)");
  run->add_option("--burnin", burnIn, "MCMC burn-in (default n/10)");
  run->add_option("--riesz-iters", rieszIters, "Riesz descent iterations");
  run->add_option("--points-dir", pointsDir, "persist each record's point set in this directory");
  run->add_option("--dump-interpolant", interpPath, "write f and the interpolant on a lat-long grid");
  run->add_option("--interp-n", interpN, "point count for --dump-interpolant");

  // --- points ---
  auto* pts = app.add_subcommand("points", "generate a point set file");
  std::string pKind = "fibonacci", pOut, pTarget = "vmf:0,0,2";
  int pN = 100, pBurn = -1;
  std::uint64_t pSeed = 0;
  pts->add_option("--points", pKind, "fibonacci|riesz|iid|mcmc");
  pts->add_option("--n", pN, "number of points")->required();
  pts->add_option("--seed", pSeed, "seed");
  pts->add_option("--burnin", pBurn, "MCMC burn-in (default n/10)");
  pts->add_option("--target", pTarget, "target for mcmc points");
  pts->add_option("--out", pOut, "output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      geostein::ExperimentConfig cfg;
      cfg.kernelSpec = kernelSpec;
      cfg.targetSpec = targetSpec;
      cfg.pointRegime = pointRegime;
      cfg.nGrid = parse_n_grid(nGridSpec);
      cfg.seeds = parse_seeds(seedsSpec);
      cfg.integrandName = integrand;
      cfg.outputPath = outPath;
      cfg.pointsDir = pointsDir;
      cfg.burnIn = burnIn;
      cfg.rieszIters = rieszIters;
      if (sigma > 0.0) cfg.sigma = sigma;
      cfg.validate();

      const auto records = geostein::run_convergence(cfg);
      if (!svgPath.empty()) {
        const auto profile = geostein::parse_kernel(kernelSpec);
        const double theory = -(profile->sobolev_order() - 2.0) / 2.0;
        geostein::emit_svg(records, svgPath, theory);
      }
      if (!interpPath.empty()) {
        const auto profile = geostein::parse_kernel(kernelSpec);
        geostein::Vec3 c;
        geostein::SteinOperatorConfig op;
        op.target = geostein::parse_target(targetSpec, &c);
        const auto X = geostein::generate_points(cfg, op.target, interpN, cfg.seeds.front());
        geostein::dump_interpolant(op, *profile, X,
                                   geostein::default_integrand(integrand, c), interpPath);
      }
      std::size_t failed = 0;
      for (const auto& r : records) {
        if (r.flag != "ok") ++failed;
      }
      std::cerr << records.size() << " records (" << failed << " flagged) -> " << outPath << "\n";
      if (failed == records.size()) return 3;
      return 0;
    }

    if (pts->parsed()) {
      geostein::ExperimentConfig cfg;
      cfg.kernelSpec = "k1:alpha=3.5";  // unused by point generation
      cfg.pointRegime = pKind;
      cfg.burnIn = pBurn;
      cfg.validate();
      const auto target = geostein::parse_target(pTarget);
      const auto X = geostein::generate_points(cfg, target, pN, pSeed);
      geostein::write_point_set(pOut, X);
      std::cerr << X.size() << " points -> " << pOut << "\n";
      return 0;
    }
  } catch (const geostein::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
