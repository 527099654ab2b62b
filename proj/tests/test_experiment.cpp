#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "geostein/experiment.hpp"

using namespace geostein;

namespace {

std::vector<ConvergenceRecord> synthetic_power_law(double slope, double scale) {
  std::vector<ConvergenceRecord> recs;
  for (int n : {50, 100, 200, 400, 800}) {
    ConvergenceRecord r;
    r.n = n;
    r.ksd = scale * std::pow(static_cast<double>(n), slope);
    r.flag = "ok";
    recs.push_back(r);
  }
  return recs;
}

// rows of the CSV body with the wall_ms column (timing, non-deterministic)
// stripped
std::vector<std::string> body_rows_without_wall(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cut = line.rfind(',');
    rows.push_back(line.substr(0, cut));
  }
  return rows;
}

}  // namespace

TEST_CASE("fit_rate on synthetic data") {
  SUBCASE("exact power law") {
    const auto fit = fit_rate(synthetic_power_law(-0.75, 2.0), 0);
    CHECK(fit.slope == doctest::Approx(-0.75).epsilon(1e-10));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("constant ksd fits slope zero") {
    const auto fit = fit_rate(synthetic_power_law(0.0, 0.3), 0);
    CHECK(std::abs(fit.slope) < 1e-12);
  }
  SUBCASE("insufficient data") {
    auto recs = synthetic_power_law(-1.0, 1.0);
    recs.resize(3);
    CHECK_THROWS_AS(fit_rate(recs, 0), InsufficientData);
    // flagged records do not count
    auto flagged = synthetic_power_law(-1.0, 1.0);
    for (auto& r : flagged) r.flag = "factorization_failure";
    CHECK_THROWS_AS(fit_rate(flagged, 0), InsufficientData);
  }
}

TEST_CASE("default integrands") {
  const auto constant = default_integrand("constant");
  CHECK(constant(UnitVector3(0.3, -0.5, 0.8)) == 1.0);
  const auto rosen = default_integrand("rosenbrock");
  CHECK(rosen(UnitVector3(1, 0, 0)) == doctest::Approx(1.0));  // (0-1)^2 + 0
  const auto linear = default_integrand("linear", Vec3(0, 0, 2));
  CHECK(linear(UnitVector3(0, 0, 1)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(default_integrand("nope"), UnknownIntegrand);
  // expectation of the linear integrand under vmf kappa=2
  CHECK(reference_expectation(vmf_target(Vec3(0, 0, 2)), linear, 200) ==
        doctest::Approx(0.5373147207275481).epsilon(1e-9));
}

TEST_CASE("kernel and target spec parsing") {
  CHECK(parse_kernel("k1:alpha=3.5")->name() == "k1");
  CHECK(parse_kernel("k2:alpha=5.5,lambda=1")->length_scale() == doctest::Approx(1.0));
  CHECK(parse_kernel("k3:j=2,lambda=2")->sobolev_order() == doctest::Approx(3.5));
  CHECK_THROWS_AS(parse_kernel("k9:alpha=1"), ConfigError);
  CHECK_THROWS_AS(parse_kernel("k1"), ConfigError);
  CHECK_THROWS_AS(parse_kernel("k1:beta=3.5"), ConfigError);
  Vec3 c;
  parse_target("vmf:0,0,2", &c);
  CHECK(c.z() == doctest::Approx(2.0));
  CHECK_THROWS_AS(parse_target("gauss:1,2,3"), ConfigError);
  CHECK_THROWS_AS(parse_target("vmf:1,2"), ConfigError);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg;
  cfg.kernelSpec = "k1:alpha=3.5";
  cfg.nGrid = {100, 50};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.nGrid = {50, 100};
  cfg.pointRegime = "hexagonal";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.pointRegime = "fibonacci";
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("smoke sweep produces a clean pinned record") {
  ExperimentConfig cfg;
  cfg.kernelSpec = "k1:alpha=3.5";
  cfg.targetSpec = "vmf:0,0,2";
  cfg.pointRegime = "fibonacci";
  cfg.nGrid = {50};
  cfg.seeds = {0};
  cfg.integrandName = "constant";
  const auto recs = run_convergence(cfg);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].flag == "ok");
  CHECK(recs[0].ksd > 0.0);
  CHECK(recs[0].jitterApplied == 0.0);
  CHECK(recs[0].absError <= 1e-9);  // constants are integrated exactly
  CHECK(recs[0].fillDistance > 0.0);
}

TEST_CASE("csv reruns are byte-identical apart from timing") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path();
  ExperimentConfig cfg;
  cfg.kernelSpec = "k1:alpha=3.5";
  cfg.pointRegime = "iid";
  cfg.nGrid = {20, 40};
  cfg.seeds = {0, 1};
  cfg.integrandName = "linear";
  cfg.outputPath = (dir / "geostein_csv_a.csv").string();
  run_convergence(cfg);
  cfg.outputPath = (dir / "geostein_csv_b.csv").string();
  run_convergence(cfg);
  const auto a = body_rows_without_wall(dir / "geostein_csv_a.csv");
  const auto b = body_rows_without_wall(dir / "geostein_csv_b.csv");
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == 5);  // header row + 4 records
  CHECK(a[0] == std::string(kCsvHeader).substr(0, std::string(kCsvHeader).rfind(',')));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  fs::remove(dir / "geostein_csv_a.csv");
  fs::remove(dir / "geostein_csv_b.csv");
}

TEST_CASE("persisted point sets reproduce the recorded ksd") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "geostein_pts_dump";
  fs::create_directories(dir);
  ExperimentConfig cfg;
  cfg.kernelSpec = "k1:alpha=3.5";
  cfg.pointRegime = "mcmc";
  cfg.nGrid = {60};
  cfg.seeds = {3};
  cfg.integrandName = "linear";
  cfg.pointsDir = dir.string();
  const auto recs = run_convergence(cfg);
  REQUIRE(recs.size() == 1);
  REQUIRE(recs[0].flag == "ok");
  const auto X = read_point_set(dir / "points_k1_mcmc_n60_seed3.txt");
  SteinOperatorConfig op;
  op.target = parse_target(cfg.targetSpec);
  const auto K = assemble_KP(op, *parse_kernel(cfg.kernelSpec), X);
  const auto r = solve_weights(K);
  CHECK(std::abs(r.ksd - recs[0].ksd) < 1e-9);
  fs::remove_all(dir);
}

TEST_CASE("svg emitter writes a plot") {
  namespace fs = std::filesystem;
  const auto path = fs::temp_directory_path() / "geostein_test.svg";
  emit_svg(synthetic_power_law(-0.75, 1.0), path.string(), -0.75);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string svg = ss.str();
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);
  fs::remove(path);
}

TEST_CASE("interpolant dump approximates the integrand where data is dense") {
  namespace fs = std::filesystem;
  const auto path = fs::temp_directory_path() / "geostein_interp.csv";
  SteinOperatorConfig op;
  op.target = vmf_target(Vec3(0, 0, 2));
  const auto profile = parse_kernel("k1:alpha=5.5");
  const auto X = fibonacci_points(200);
  const auto f = default_integrand("rosenbrock");
  dump_interpolant(op, *profile, X, f, path.string(), 18, 36);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "q1,q2,f,fhat");
  double maxAbsErr = 0.0, q1, q2, fv, fh;
  char comma;
  int rows = 0;
  while (in >> q1 >> comma >> q2 >> comma >> fv >> comma >> fh) {
    maxAbsErr = std::max(maxAbsErr, std::abs(fv - fh));
    ++rows;
  }
  CHECK(rows == 18 * 36);
  CHECK(maxAbsErr < 0.05);  // n = 200 with a smooth kernel interpolates well
  fs::remove(path);
}
