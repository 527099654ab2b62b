#pragma once

// Convergence-experiment harness: sweeps point-set size and seed for a given
// kernel/target/point regime, records KSD and integration error against the
// reference quadrature truth, and emits a flat CSV (plus an optional log-log
// SVG and interpolant grid dumps).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "geostein/cubature.hpp"
#include "geostein/errors.hpp"
#include "geostein/point_sets.hpp"
#include "geostein/stein.hpp"

namespace geostein {

struct ExperimentConfig {
  std::string kernelSpec;               // e.g. "k1:alpha=3.5"
  std::string targetSpec = "vmf:0,0,2";  // e.g. "vmf:c1,c2,c3"
  std::string pointRegime = "fibonacci";  // fibonacci | riesz | iid | mcmc
  std::vector<int> nGrid = {50, 100, 200, 400, 800};
  std::vector<std::uint64_t> seeds = {0};
  std::optional<double> sigma;  // empty -> limit estimator
  std::string integrandName = "rosenbrock";
  std::string outputPath;      // empty -> no CSV
  std::string pointsDir;       // when set, persist each record's point set
  int burnIn = -1;             // -1 -> n/10
  int oracleResolution = 200;
  int rieszIters = 500;

  void validate() const {
    if (kernelSpec.empty()) throw ConfigError("config: kernel spec required");
    if (nGrid.empty()) throw ConfigError("config: nGrid must be nonempty");
    for (std::size_t i = 1; i < nGrid.size(); ++i) {
      if (nGrid[i] <= nGrid[i - 1]) throw ConfigError("config: nGrid must be strictly increasing");
    }
    if (seeds.empty()) throw ConfigError("config: at least one seed required");
    if (pointRegime != "fibonacci" && pointRegime != "riesz" && pointRegime != "iid" &&
        pointRegime != "mcmc") {
      throw ConfigError("config: unknown point regime '" + pointRegime + "'");
    }
    if (sigma && !(*sigma > 0.0)) throw ConfigError("config: sigma must be positive");
  }
};

struct ConvergenceRecord {
  int n = 0;
  std::uint64_t seed = 0;
  std::string kernel;
  double alpha = 0.0;
  double lambda = 0.0;
  std::string points;
  double ksd = std::numeric_limits<double>::quiet_NaN();
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double truth = std::numeric_limits<double>::quiet_NaN();
  double absError = std::numeric_limits<double>::quiet_NaN();
  double fillDistance = std::numeric_limits<double>::quiet_NaN();
  double jitterApplied = 0.0;
  std::string flag = "ok";
  double wallTimeMs = 0.0;
};

// --- spec parsing -----------------------------------------------------------

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

inline double parse_kv(const std::string& body, const std::string& key) {
  for (const auto& kv : split(body, ',')) {
    const auto eq = kv.find('=');
    if (eq != std::string::npos && kv.substr(0, eq) == key) {
      return std::stod(kv.substr(eq + 1));
    }
  }
  throw ConfigError("kernel spec: missing parameter '" + key + "'");
}

}  // namespace detail

inline ProfilePtr parse_kernel(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("kernel spec: expected '<name>:<params>'");
  const std::string name = spec.substr(0, colon);
  const std::string body = spec.substr(colon + 1);
  try {
    if (name == "k1") return profile_k1(detail::parse_kv(body, "alpha"));
    if (name == "k2") {
      return profile_k2(detail::parse_kv(body, "alpha"), detail::parse_kv(body, "lambda"));
    }
    if (name == "k3") {
      return profile_k3(static_cast<int>(detail::parse_kv(body, "j")),
                        detail::parse_kv(body, "lambda"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("kernel spec: ") + e.what());
  }
  throw ConfigError("kernel spec: unknown kernel '" + name + "'");
}

// `vmf:<c1>,<c2>,<c3>` -> von Mises-Fisher with parameter c.
inline TargetDensity parse_target(const std::string& spec, Vec3* cOut = nullptr) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos || spec.substr(0, colon) != "vmf") {
    throw ConfigError("target spec: expected 'vmf:<c1>,<c2>,<c3>'");
  }
  const auto parts = detail::split(spec.substr(colon + 1), ',');
  if (parts.size() != 3) throw ConfigError("target spec: expected three components");
  Vec3 c;
  try {
    c = Vec3(std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2]));
  } catch (const std::exception&) {
    throw ConfigError("target spec: could not parse components");
  }
  if (cOut) *cOut = c;
  return vmf_target(c);
}

// Named default integrands.  "linear" is f(x) = c.x/|c| for the target
// parameter c (axis (0,0,1) when c = 0).
inline AmbientFn default_integrand(const std::string& name, const Vec3& c = Vec3(0, 0, 1)) {
  if (name == "constant") {
    return [](const UnitVector3&) { return 1.0; };
  }
  if (name == "linear") {
    const Vec3 dir = c.norm() > 0.0 ? Vec3(c.normalized()) : Vec3(0, 0, 1);
    return [dir](const UnitVector3& x) { return dir.dot(x.vec()); };
  }
  if (name == "rosenbrock") {
    return [](const UnitVector3& x) {
      const double a = x.x2() - x.x1() * x.x1();
      const double b = 1.0 - x.x1();
      return a * a + b * b;
    };
  }
  throw UnknownIntegrand("default_integrand: unknown integrand '" + name + "'");
}

inline std::vector<UnitVector3> generate_points(const ExperimentConfig& cfg,
                                                const TargetDensity& target, int n,
                                                std::uint64_t seed) {
  if (cfg.pointRegime == "fibonacci") return fibonacci_points(n);
  if (cfg.pointRegime == "riesz") return riesz_minimize(n, 1.0, cfg.rieszIters, {seed});
  if (cfg.pointRegime == "iid") return iid_uniform(n, {seed});
  const int burn = cfg.burnIn >= 0 ? cfg.burnIn : n / 10;
  return mh_chain(target, n, burn, {seed}).first;
}

// --- CSV --------------------------------------------------------------------

inline constexpr const char* kCsvHeader =
    "n,seed,kernel,alpha,lambda,points,ksd,estimate,truth,abs_error,fill_distance,jitter,flag,"
    "wall_ms";

inline std::string csv_row(const ConvergenceRecord& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.n << "," << r.seed << "," << r.kernel << "," << r.alpha << "," << r.lambda << ","
     << r.points << "," << r.ksd << "," << r.estimate << "," << r.truth << "," << r.absError
     << "," << r.fillDistance << "," << r.jitterApplied << "," << r.flag << "," << r.wallTimeMs;
  return os.str();
}

// --- the sweep ----------------------------------------------------------------

inline std::vector<ConvergenceRecord> run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  const ProfilePtr profile = parse_kernel(cfg.kernelSpec);
  Vec3 c = Vec3::Zero();
  const TargetDensity target = parse_target(cfg.targetSpec, &c);
  const AmbientFn f = default_integrand(cfg.integrandName, c);
  const double truth = reference_expectation(target, f, cfg.oracleResolution);

  SteinOperatorConfig op;
  op.target = target;

  std::ofstream csv;
  if (!cfg.outputPath.empty()) {
    csv.open(cfg.outputPath);
    if (!csv) throw std::runtime_error("run_convergence: cannot open " + cfg.outputPath);
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    csv << "# geostein convergence sweep; kernel=" << cfg.kernelSpec
        << " target=" << cfg.targetSpec << " points=" << cfg.pointRegime
        << " integrand=" << cfg.integrandName
        << " sigma=" << (cfg.sigma ? std::to_string(*cfg.sigma) : std::string("limit"))
        << " epoch_ms=" << std::chrono::duration_cast<std::chrono::milliseconds>(now).count()
        << "\n";
    csv << kCsvHeader << "\n";
  }

  std::vector<ConvergenceRecord> records;
  for (int n : cfg.nGrid) {
    for (std::uint64_t seed : cfg.seeds) {
      ConvergenceRecord rec;
      rec.n = n;
      rec.seed = seed;
      rec.kernel = profile->name();
      rec.alpha = profile->sobolev_order();
      rec.lambda = profile->length_scale();
      rec.points = cfg.pointRegime;
      rec.truth = truth;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const auto X = generate_points(cfg, target, n, seed);
        if (!cfg.pointsDir.empty()) {
          std::ostringstream name;
          name << cfg.pointsDir << "/points_" << rec.kernel << "_" << cfg.pointRegime << "_n" << n
               << "_seed" << seed << ".txt";
          write_point_set(name.str(), X);
        }
        rec.fillDistance = estimate_fill_distance(X, std::max(4 * n, 2000));
        const SteinKernelMatrix K = assemble_KP(op, *profile, X);
        rec.jitterApplied = K.jitter_applied();
        const CubatureResult w = solve_weights(K);
        rec.ksd = w.ksd;
        Eigen::VectorXd fv(X.size());
        for (Eigen::Index i = 0; i < fv.size(); ++i) fv[i] = f(X[static_cast<std::size_t>(i)]);
        if (cfg.sigma) {
          rec.estimate = integrate_sigma(K, {*cfg.sigma}, fv);
        } else {
          rec.estimate = integrate(w, fv);
        }
        rec.absError = std::abs(rec.estimate - truth);
      } catch (const SeriesDivergence&) {
        rec.flag = "series_divergence";
      } catch (const FactorizationFailure&) {
        rec.flag = "factorization_failure";
      } catch (const DegenerateSystem&) {
        rec.flag = "degenerate_system";
      } catch (const std::exception&) {
        rec.flag = "error";
      }
      const auto t1 = std::chrono::steady_clock::now();
      rec.wallTimeMs = std::chrono::duration<double, std::milli>(t1 - t0).count();
      records.push_back(rec);
      if (csv.is_open()) {
        csv << csv_row(rec) << "\n";
        csv.flush();
      }
    }
  }
  return records;
}

// --- rate fitting -------------------------------------------------------------

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares of log(ksd) on log(n) over unflagged records with
// n >= nMin.
inline RateFit fit_rate(const std::vector<ConvergenceRecord>& records, int nMin) {
  std::vector<double> xs, ys;
  for (const auto& r : records) {
    if (r.flag != "ok" || r.n < nMin || !(r.ksd > 0.0) || !std::isfinite(r.ksd)) continue;
    xs.push_back(std::log(static_cast<double>(r.n)));
    ys.push_back(std::log(r.ksd));
  }
  if (xs.size() < 4) throw InsufficientData("fit_rate: need at least 4 unflagged records");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssRes = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double pred = fit.intercept + fit.slope * xs[i];
    ssRes += (ys[i] - pred) * (ys[i] - pred);
  }
  fit.r2 = syy > 0 ? 1.0 - ssRes / syy : 1.0;
  return fit;
}

// --- SVG ------------------------------------------------------------------------

// Minimal log-log plot of mean KSD vs n with a dashed theoretical-slope line.
inline void emit_svg(const std::vector<ConvergenceRecord>& records, const std::string& path,
                     double theorySlope) {
  struct Pt {
    double n, ksd;
  };
  std::vector<Pt> pts;
  for (int n : [&] {
         std::vector<int> ns;
         for (const auto& r : records) {
           if (r.flag == "ok" && std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
         }
         std::sort(ns.begin(), ns.end());
         return ns;
       }()) {
    double sum = 0;
    int count = 0;
    for (const auto& r : records) {
      if (r.flag == "ok" && r.n == n && r.ksd > 0) {
        sum += r.ksd;
        ++count;
      }
    }
    if (count > 0) pts.push_back({static_cast<double>(n), sum / count});
  }
  if (pts.empty()) return;

  const double W = 480, H = 360, ml = 60, mr = 20, mt = 20, mb = 40;
  double x0 = std::log10(pts.front().n), x1 = std::log10(pts.back().n);
  double y0 = 1e300, y1 = -1e300;
  for (const auto& p : pts) {
    y0 = std::min(y0, std::log10(p.ksd));
    y1 = std::max(y1, std::log10(p.ksd));
  }
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  auto X = [&](double lx) { return ml + (lx - x0) / (x1 - x0) * (W - ml - mr); };
  auto Y = [&](double ly) { return H - mb - (ly - y0) / (y1 - y0) * (H - mt - mb); };

  std::ofstream out(path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
  out << "<rect x='" << ml << "' y='" << mt << "' width='" << (W - ml - mr) << "' height='"
      << (H - mt - mb) << "' fill='none' stroke='black'/>\n";
  out << "<polyline fill='none' stroke='steelblue' stroke-width='2' points='";
  for (const auto& p : pts) out << X(std::log10(p.n)) << "," << Y(std::log10(p.ksd)) << " ";
  out << "'/>\n";
  // dashed theory line anchored at the first mean point
  const double c0 = std::log10(pts.front().ksd) - theorySlope * std::log10(pts.front().n);
  out << "<polyline fill='none' stroke='gray' stroke-dasharray='6,4' points='";
  out << X(x0) << "," << Y(theorySlope * x0 + c0) << " " << X(x1) << ","
      << Y(theorySlope * x1 + c0);
  out << "'/>\n";
  for (const auto& p : pts) {
    out << "<circle cx='" << X(std::log10(p.n)) << "' cy='" << Y(std::log10(p.ksd))
        << "' r='3' fill='steelblue'/>\n";
  }
  out << "<text x='" << (W / 2) << "' y='" << (H - 8) << "' text-anchor='middle'>n</text>\n";
  out << "<text x='14' y='" << (H / 2) << "' transform='rotate(-90 14 " << (H / 2)
      << ")' text-anchor='middle'>KSD</text>\n";
  out << "</svg>\n";
}

// --- interpolant dump ------------------------------------------------------------

// Writes f and the kernel interpolant fhat = I_X(f) + k_P(x, X) K_P^{-1}
// (f - I_X(f) 1) on a lat-long grid to CSV columns q1,q2,f,fhat.
inline void dump_interpolant(const SteinOperatorConfig& op, const RadialProfile& profile,
                             const std::vector<UnitVector3>& X, const AmbientFn& f,
                             const std::string& path, int rows = 36, int cols = 72) {
  const SteinKernelMatrix K = assemble_KP(op, profile, X);
  const CubatureResult w = solve_weights(K);
  Eigen::VectorXd fv(static_cast<Eigen::Index>(X.size()));
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv[i] = f(X[static_cast<std::size_t>(i)]);
  const double ixf = integrate(w, fv);
  const Eigen::VectorXd resid =
      K.solve(fv - ixf * Eigen::VectorXd::Ones(fv.size()));

  std::ofstream out(path);
  if (!out) throw std::runtime_error("dump_interpolant: cannot open " + path);
  out.precision(17);
  out << "q1,q2,f,fhat\n";
  for (int i = 0; i < rows; ++i) {
    const double q2 = kPi * (i + 0.5) / rows;
    for (int j = 0; j < cols; ++j) {
      const double q1 = 2.0 * kPi * (j + 0.5) / cols;
      const UnitVector3 x = from_chart({q1, q2});
      Eigen::VectorXd kv(fv.size());
      for (Eigen::Index k = 0; k < kv.size(); ++k) {
        kv[k] = stein_kernel(op, profile, x, X[static_cast<std::size_t>(k)]);
      }
      const double fhat = ixf + kv.dot(resid);
      out << q1 << "," << q2 << "," << f(x) << "," << fhat << "\n";
    }
  }
}

}  // namespace geostein
