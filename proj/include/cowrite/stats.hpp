#pragma once

// Group-comparison statistics: ICC(1), random-intercept linear mixed models
// fitted by profiled REML, cluster bootstrap inference, Cohen's d and kappa.
//
// REML model: y = Xβ + Zu + ε, u ~ N(0, σ_b²), ε ~ N(0, σ²), one intercept per
// group. With γ = σ_b²/σ² the marginal covariance is σ²H, H block-diagonal
// with H_g = I + γ11ᵀ, so H_g⁻¹ = I − c_g 11ᵀ with c_g = γ/(1 + γ n_g) and
// |H_g| = 1 + γ n_g. The profiled criterion
//   (N − p) ln σ̂²(γ) + Σ ln(1 + γ n_g) + ln |XᵀH⁻¹X|
// depends on the data only through per-group sums, and is minimised over
// t = γ/(1 + γ) ∈ [0, 1) by a grid scan refined with golden-section search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cowrite/csv.hpp"
#include "cowrite/error.hpp"
#include "cowrite/parallel.hpp"

namespace cowrite::stats {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Sample quantile by linear interpolation between order statistics
/// (the "type 7" definition). `sorted` must be ascending.
inline double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw NumericalError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline Interval percentile_interval(std::vector<double> draws, double level) {
  std::sort(draws.begin(), draws.end());
  const double a = (1.0 - level) / 2.0;
  return {quantile(draws, a), quantile(draws, 1.0 - a)};
}

/// Two-sided bootstrap p-value for H0: θ = 0 from the share of draws on the
/// far side of zero.
inline double bootstrap_p_value(const std::vector<double>& draws) {
  if (draws.empty()) throw NumericalError("p-value from an empty bootstrap sample");
  std::size_t below = 0, above = 0;
  for (double d : draws) {
    if (d <= 0.0) ++below;
    if (d >= 0.0) ++above;
  }
  const double p = 2.0 * static_cast<double>(std::min(below, above) + 1) / static_cast<double>(draws.size() + 1);
  return std::min(1.0, p);
}

/// Independent generator for replicate `index` of a run seeded with `seed`.
inline std::mt19937_64 replicate_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5eedu};
  return std::mt19937_64(seq);
}

/// Maps labels to dense ids in order of first appearance.
inline std::vector<std::size_t> group_ids(const std::vector<std::string>& labels, std::size_t* count = nullptr) {
  std::map<std::string, std::size_t> ids;
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(ids.emplace(l, ids.size()).first->second);
  if (count) *count = ids.size();
  return out;
}

// ---------------------------------------------------------------------------
// ICC

struct IccResult {
  double icc = 0.0;
  double raw = 0.0;      // before clamping at zero
  bool clamped = false;
  Interval ci;
  std::size_t groups = 0;
  double mean_group_size = 0.0;
  double k0 = 0.0;
  double msb = 0.0;
  double msw = 0.0;
};

namespace detail {

struct IccCore {
  double icc, msb, msw, k0;
};

inline IccCore icc_core(const std::vector<std::vector<double>>& groups) {
  const std::size_t a = groups.size();
  if (a < 2) throw UsageError("ICC needs at least two groups");
  double n = 0.0, sum = 0.0, sum_n2 = 0.0;
  for (const auto& g : groups) {
    if (g.empty()) throw UsageError("ICC group without observations");
    n += static_cast<double>(g.size());
    sum_n2 += static_cast<double>(g.size() * g.size());
    for (double v : g) sum += v;
  }
  if (n - static_cast<double>(a) < 1.0) throw UsageError("ICC needs a group with at least two observations");
  const double grand = sum / n;
  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    double m = 0.0;
    for (double v : g) m += v;
    m /= static_cast<double>(g.size());
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) ssw += (v - m) * (v - m);
  }
  IccCore c;
  c.msb = ssb / static_cast<double>(a - 1);
  c.msw = ssw / (n - static_cast<double>(a));
  c.k0 = (n - sum_n2 / n) / static_cast<double>(a - 1);
  const double den = c.msb + (c.k0 - 1.0) * c.msw;
  c.icc = den > 0.0 ? (c.msb - c.msw) / den : 0.0;
  return c;
}

}  // namespace detail

struct IccOptions {
  std::size_t bootstrap = 999;
  double level = 0.95;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

/// One-way random-effects ICC(1) with the unbalanced-design k₀; the interval
/// resamples whole groups.
inline IccResult icc(const std::vector<double>& values, const std::vector<std::string>& grouping,
                     const IccOptions& options = {}) {
  if (values.size() != grouping.size()) throw UsageError("ICC: values and groups differ in length");
  std::size_t a = 0;
  const auto ids = group_ids(grouping, &a);
  std::vector<std::vector<double>> groups(a);
  for (std::size_t i = 0; i < values.size(); ++i) groups[ids[i]].push_back(values[i]);

  const auto core = detail::icc_core(groups);
  IccResult r;
  r.raw = core.icc;
  r.clamped = core.icc < 0.0;
  r.icc = std::clamp(core.icc, 0.0, 1.0);
  r.msb = core.msb;
  r.msw = core.msw;
  r.k0 = core.k0;
  r.groups = a;
  r.mean_group_size = static_cast<double>(values.size()) / static_cast<double>(a);

  if (options.bootstrap > 0) {
    std::vector<double> draws(options.bootstrap, std::numeric_limits<double>::quiet_NaN());
    parallel_for(options.bootstrap, options.jobs, [&](std::size_t b) {
      auto rng = replicate_rng(options.seed, b);
      std::uniform_int_distribution<std::size_t> pick(0, a - 1);
      std::vector<std::vector<double>> sample(a);
      for (auto& g : sample) g = groups[pick(rng)];
      try {
        draws[b] = std::clamp(detail::icc_core(sample).icc, 0.0, 1.0);
      } catch (const UsageError&) {
      }
    });
    draws.erase(std::remove_if(draws.begin(), draws.end(), [](double d) { return std::isnan(d); }), draws.end());
    if (!draws.empty()) r.ci = percentile_interval(std::move(draws), options.level);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Random-intercept REML

struct Design {
  std::vector<std::string> names;  // column names of x, intercept first
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::size_t> group;  // dense ids
  std::size_t n_groups = 0;
};

struct GroupSums {
  double n = 0.0;
  Eigen::MatrixXd xtx;
  Eigen::VectorXd xt1;
  Eigen::VectorXd xty;
  double yty = 0.0;
  double sy = 0.0;
};

inline std::vector<GroupSums> group_sums(const Design& d) {
  const auto p = d.x.cols();
  std::vector<GroupSums> g(d.n_groups);
  for (auto& s : g) {
    s.xtx = Eigen::MatrixXd::Zero(p, p);
    s.xt1 = Eigen::VectorXd::Zero(p);
    s.xty = Eigen::VectorXd::Zero(p);
  }
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    auto& s = g[d.group[static_cast<std::size_t>(i)]];
    const Eigen::VectorXd xi = d.x.row(i).transpose();
    const double yi = d.y(i);
    s.n += 1.0;
    s.xtx.noalias() += xi * xi.transpose();
    s.xt1 += xi;
    s.xty += xi * yi;
    s.yty += yi * yi;
    s.sy += yi;
  }
  return g;
}

struct MixedFit {
  std::vector<std::string> names;
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  double var_random = 0.0;
  double var_residual = 0.0;
  double gamma = 0.0;
  double loglik = 0.0;  // REML log-likelihood
  double aic = 0.0;
  double bic = 0.0;
  std::size_t n_obs = 0;
  std::size_t n_groups = 0;
  bool boundary = false;     // var_random estimated at zero
  std::vector<double> trace;  // best criterion after each evaluation
};

struct MixedOptions {
  bool force_zero_variance = false;
  double tolerance = 1e-10;
  std::size_t grid = 200;
  bool keep_trace = true;
};

namespace detail {

struct Profile {
  double criterion;  // (N-p) ln σ² + ln|H| + ln|XᵀH⁻¹X|
  Eigen::VectorXd beta;
  Eigen::MatrixXd m_inv;
  double sigma2;
};

inline std::optional<Profile> profile(const std::vector<GroupSums>& groups, double n_obs, Eigen::Index p, double gamma) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  double q = 0.0, logdet_h = 0.0;
  for (const auto& g : groups) {
    const double c = gamma / (1.0 + gamma * g.n);
    m += g.xtx - c * g.xt1 * g.xt1.transpose();
    b += g.xty - c * g.sy * g.xt1;
    q += g.yty - c * g.sy * g.sy;
    logdet_h += std::log1p(gamma * g.n);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
  const Eigen::VectorXd d = ldlt.vectorD();
  if ((d.array() <= 1e-12 * std::max(1.0, d.cwiseAbs().maxCoeff())).any()) return std::nullopt;
  Profile out;
  out.beta = ldlt.solve(b);
  const double rss = q - b.dot(out.beta);
  const double dof = n_obs - static_cast<double>(p);
  out.sigma2 = rss / dof;
  if (!(out.sigma2 > 0.0) || !std::isfinite(out.sigma2)) return std::nullopt;
  out.criterion = dof * std::log(out.sigma2) + logdet_h + d.array().log().sum();
  out.m_inv = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
  return out;
}

}  // namespace detail

/// Fits from per-group sums; `names` label the columns of X.
inline MixedFit fit_random_intercept(const std::vector<GroupSums>& groups, std::vector<std::string> names,
                                     const MixedOptions& options = {}) {
  if (groups.empty()) throw UsageError("mixed model needs at least one group");
  const Eigen::Index p = groups.front().xtx.rows();
  double n_obs = 0.0;
  for (const auto& g : groups) n_obs += g.n;
  if (n_obs <= static_cast<double>(p)) throw UsageError("mixed model needs more observations than coefficients");

  MixedFit fit;
  fit.names = std::move(names);
  fit.n_obs = static_cast<std::size_t>(n_obs);
  fit.n_groups = groups.size();

  double best_t = 0.0;
  double best = std::numeric_limits<double>::infinity();
  auto eval = [&](double t) {
    const double gamma = t / (1.0 - t);
    auto pr = detail::profile(groups, n_obs, p, gamma);
    const double v = pr ? pr->criterion : std::numeric_limits<double>::infinity();
    if (v < best) {
      best = v;
      best_t = t;
    }
    if (options.keep_trace) fit.trace.push_back(best);
    return v;
  };

  if (options.force_zero_variance) {
    eval(0.0);
  } else {
    const double t_max = 1.0 - 1e-9;
    const std::size_t steps = std::max<std::size_t>(options.grid, 4);
    std::vector<double> ts(steps + 1), vs(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
      ts[i] = t_max * static_cast<double>(i) / static_cast<double>(steps);
      vs[i] = eval(ts[i]);
    }
    const auto i = static_cast<std::size_t>(std::min_element(vs.begin(), vs.end()) - vs.begin());
    double lo = ts[i == 0 ? 0 : i - 1];
    double hi = ts[std::min(i + 1, steps)];
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = eval(x1), f2 = eval(x2);
    while (hi - lo > options.tolerance) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = eval(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = eval(x2);
      }
    }
    eval(0.0);
  }
  if (!std::isfinite(best)) {
    std::string msg = "REML criterion is not finite anywhere on the search path (design may be singular)";
    throw NumericalError(msg);
  }

  const double gamma = best_t / (1.0 - best_t);
  const auto pr = *detail::profile(groups, n_obs, p, gamma);
  fit.beta = pr.beta;
  fit.var_residual = pr.sigma2;
  fit.gamma = gamma;
  fit.var_random = gamma * pr.sigma2;
  fit.boundary = best_t == 0.0;
  fit.se = (pr.sigma2 * pr.m_inv.diagonal().array()).sqrt();
  const double dof = n_obs - static_cast<double>(p);
  fit.loglik = -0.5 * (pr.criterion + dof * (1.0 + std::log(2.0 * std::numbers::pi)));
  const double k = static_cast<double>(p) + 2.0;
  fit.aic = -2.0 * fit.loglik + 2.0 * k;
  fit.bic = -2.0 * fit.loglik + k * std::log(n_obs);
  return fit;
}

inline void check_full_rank(const Design& d) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.x);
  if (qr.rank() < d.x.cols()) throw UsageError("design matrix is rank deficient");
}

inline MixedFit fit_random_intercept(const Design& d, const MixedOptions& options = {}) {
  if (d.x.rows() != d.y.size() || d.group.size() != static_cast<std::size_t>(d.y.size()))
    throw UsageError("design dimensions disagree");
  check_full_rank(d);
  return fit_random_intercept(group_sums(d), d.names, options);
}

inline Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return x.colPivHouseholderQr().solve(y);
}

// ---------------------------------------------------------------------------
// Cluster bootstrap

struct BootstrapOptions {
  std::size_t replicates = 999;
  double level = 0.95;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

struct BootstrapResult {
  std::vector<std::vector<double>> draws;  // per coefficient, kept replicates only
  std::vector<Interval> ci;
  std::vector<double> p;
  std::size_t dropped = 0;
  bool too_many_dropped = false;  // more than 10% of replicates failed
};

/// Resamples whole groups with replacement; a group drawn twice counts as two
/// groups. Replicates whose fit fails are dropped and counted.
inline BootstrapResult cluster_bootstrap(const Design& d, const BootstrapOptions& options = {},
                                         const MixedOptions& mixed = {}) {
  if (options.replicates == 0) throw UsageError("bootstrap needs at least one replicate");
  const auto sums = group_sums(d);
  const std::size_t a = sums.size();
  const auto p = static_cast<std::size_t>(d.x.cols());
  MixedOptions quiet = mixed;
  quiet.keep_trace = false;

  std::vector<std::optional<Eigen::VectorXd>> reps(options.replicates);
  parallel_for(options.replicates, options.jobs, [&](std::size_t b) {
    auto rng = replicate_rng(options.seed, b);
    std::uniform_int_distribution<std::size_t> pick(0, a - 1);
    std::vector<GroupSums> sample;
    sample.reserve(a);
    for (std::size_t i = 0; i < a; ++i) sample.push_back(sums[pick(rng)]);
    try {
      reps[b] = fit_random_intercept(sample, d.names, quiet).beta;
    } catch (const NumericalError&) {
    } catch (const UsageError&) {
    }
  });

  BootstrapResult r;
  r.draws.assign(p, {});
  for (const auto& rep : reps) {
    if (!rep) {
      ++r.dropped;
      continue;
    }
    for (std::size_t j = 0; j < p; ++j) r.draws[j].push_back((*rep)(static_cast<Eigen::Index>(j)));
  }
  r.too_many_dropped = static_cast<double>(r.dropped) > 0.1 * static_cast<double>(options.replicates);
  if (r.dropped == options.replicates) throw NumericalError("every bootstrap replicate failed");
  for (std::size_t j = 0; j < p; ++j) {
    r.ci.push_back(percentile_interval(r.draws[j], options.level));
    r.p.push_back(bootstrap_p_value(r.draws[j]));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Effect sizes and agreement

/// Standardised coefficient against the total SD of the random-intercept model.
inline double cohens_d(double beta, double var_random, double var_residual) {
  const double total = var_random + var_residual;
  if (!(total > 0.0)) throw NumericalError("Cohen's d with zero total variance");
  return beta / std::sqrt(total);
}

struct KappaResult {
  double kappa = 0.0;
  double observed = 0.0;
  double expected = 0.0;
};

inline KappaResult cohens_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size() || a.empty()) throw UsageError("kappa needs two rating vectors of equal, non-zero length");
  const double n = static_cast<double>(a.size());
  double agree = 0.0, pa = 0.0, pb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i] ? 1.0 : 0.0;
    pa += a[i] ? 1.0 : 0.0;
    pb += b[i] ? 1.0 : 0.0;
  }
  pa /= n;
  pb /= n;
  KappaResult r;
  r.observed = agree / n;
  r.expected = pa * pb + (1.0 - pa) * (1.0 - pb);
  if (r.expected >= 1.0) {
    if (r.observed < 1.0) throw NumericalError("kappa undefined: both raters constant but disagreeing");
    r.kappa = 1.0;
    return r;
  }
  r.kappa = (r.observed - r.expected) / (1.0 - r.expected);
  return r;
}

// ---------------------------------------------------------------------------
// Regression with binary factors

/// Binary fixed effects plus a random intercept per group. Each factor is
/// coded 1 for `level` and 0 for `reference`.
struct Factor {
  std::string name;
  std::string reference;
  std::string level;
};

struct RegressionSpec {
  std::string outcome = "dim1";
  std::vector<Factor> factors;
  bool test_interactions = true;   // fit pairwise interactions, keep the significant ones
  bool force_interactions = false;  // keep all pairwise interactions regardless
  double interaction_alpha = 0.05;
};

struct Observation {
  double y = 0.0;
  std::string group;
  std::vector<int> levels;  // 0/1 per spec factor
};

inline std::string term_name(const Factor& f) { return f.name + "_" + f.level; }

/// `interactions` lists index pairs into spec.factors.
inline Design build_design(const RegressionSpec& spec, const std::vector<Observation>& obs,
                           const std::vector<std::pair<std::size_t, std::size_t>>& interactions = {}) {
  Design d;
  d.names.push_back("(Intercept)");
  for (const auto& f : spec.factors) d.names.push_back(term_name(f));
  for (auto [i, j] : interactions) d.names.push_back(term_name(spec.factors[i]) + ":" + term_name(spec.factors[j]));
  const auto p = static_cast<Eigen::Index>(d.names.size());
  d.x.resize(static_cast<Eigen::Index>(obs.size()), p);
  d.y.resize(static_cast<Eigen::Index>(obs.size()));
  std::vector<std::string> labels;
  for (std::size_t r = 0; r < obs.size(); ++r) {
    const auto& o = obs[r];
    if (o.levels.size() != spec.factors.size()) throw UsageError("observation has the wrong number of factor levels");
    if (!std::isfinite(o.y)) throw DataError("non-finite outcome value");
    const auto ri = static_cast<Eigen::Index>(r);
    d.x(ri, 0) = 1.0;
    for (std::size_t f = 0; f < spec.factors.size(); ++f) {
      if (o.levels[f] != 0 && o.levels[f] != 1) throw UsageError("factor levels must be 0 or 1");
      d.x(ri, static_cast<Eigen::Index>(1 + f)) = o.levels[f];
    }
    for (std::size_t k = 0; k < interactions.size(); ++k)
      d.x(ri, static_cast<Eigen::Index>(1 + spec.factors.size() + k)) =
          o.levels[interactions[k].first] * o.levels[interactions[k].second];
    d.y(ri) = o.y;
    labels.push_back(o.group);
  }
  d.group = group_ids(labels, &d.n_groups);
  return d;
}

struct RegressionFit {
  std::string outcome;
  MixedFit model;
  BootstrapResult bootstrap;
  std::vector<double> d;  // Cohen's d per coefficient
  std::vector<std::string> dropped_interactions;
  std::vector<std::string> warnings;
};

struct RegressionOptions {
  BootstrapOptions bootstrap;
  MixedOptions mixed;
};

inline RegressionFit fit_regression(const RegressionSpec& spec, const std::vector<Observation>& obs,
                                    const RegressionOptions& options = {}) {
  if (obs.empty()) throw UsageError("regression on an empty data set");
  std::vector<std::pair<std::size_t, std::size_t>> inter;
  if (spec.test_interactions || spec.force_interactions)
    for (std::size_t i = 0; i < spec.factors.size(); ++i)
      for (std::size_t j = i + 1; j < spec.factors.size(); ++j) inter.emplace_back(i, j);

  RegressionFit out;
  out.outcome = spec.outcome;
  if (!inter.empty() && !spec.force_interactions) {
    auto d = build_design(spec, obs, inter);
    check_full_rank(d);
    auto boot = cluster_bootstrap(d, options.bootstrap, options.mixed);
    std::vector<std::pair<std::size_t, std::size_t>> keep;
    const std::size_t base = 1 + spec.factors.size();
    for (std::size_t k = 0; k < inter.size(); ++k) {
      if (boot.p[base + k] < spec.interaction_alpha) keep.push_back(inter[k]);
      else out.dropped_interactions.push_back(d.names[base + k]);
    }
    inter = std::move(keep);
  }

  const auto d = build_design(spec, obs, inter);
  out.model = fit_random_intercept(d, options.mixed);
  out.bootstrap = cluster_bootstrap(d, options.bootstrap, options.mixed);
  if (out.bootstrap.too_many_dropped)
    out.warnings.push_back(std::to_string(out.bootstrap.dropped) + " bootstrap replicates failed to fit");
  for (Eigen::Index j = 0; j < out.model.beta.size(); ++j)
    out.d.push_back(cohens_d(out.model.beta(j), out.model.var_random, out.model.var_residual));
  return out;
}

// ---------------------------------------------------------------------------
// Export

inline nlohmann::json to_json(const RegressionFit& f) {
  nlohmann::json coefs = nlohmann::json::array();
  for (std::size_t j = 0; j < f.model.names.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    coefs.push_back({{"term", f.model.names[j]},
                     {"estimate", f.model.beta(jj)},
                     {"se", f.model.se(jj)},
                     {"ci_lo", f.bootstrap.ci[j].lo},
                     {"ci_hi", f.bootstrap.ci[j].hi},
                     {"p", f.bootstrap.p[j]},
                     {"d", f.d[j]}});
  }
  return {{"outcome", f.outcome},
          {"coefficients", std::move(coefs)},
          {"aic", f.model.aic},
          {"bic", f.model.bic},
          {"loglik", f.model.loglik},
          {"n_obs", f.model.n_obs},
          {"n_groups", f.model.n_groups},
          {"var_random", f.model.var_random},
          {"var_residual", f.model.var_residual},
          {"boundary", f.model.boundary},
          {"bootstrap_replicates", f.bootstrap.draws.empty() ? 0 : f.bootstrap.draws.front().size()},
          {"bootstrap_dropped", f.bootstrap.dropped},
          {"dropped_interactions", f.dropped_interactions},
          {"warnings", f.warnings}};
}

inline nlohmann::json to_json(const IccResult& r) {
  return {{"icc", r.icc},       {"raw", r.raw},     {"clamped", r.clamped},
          {"ci_lo", r.ci.lo},   {"ci_hi", r.ci.hi}, {"groups", r.groups},
          {"mean_group_size", r.mean_group_size}};
}

/// Long-format coefficient table: one row per (outcome, term) plus one row
/// per model statistic.
inline void write_coefficients_csv(std::ostream& out, const std::vector<RegressionFit>& fits) {
  csv::write_row(out, {"outcome", "term", "estimate", "se", "ci_lo", "ci_hi", "p", "d"});
  for (const auto& f : fits) {
    for (std::size_t j = 0; j < f.model.names.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      csv::write_row(out, {f.outcome, f.model.names[j], csv::num(f.model.beta(jj)), csv::num(f.model.se(jj)),
                           csv::num(f.bootstrap.ci[j].lo), csv::num(f.bootstrap.ci[j].hi), csv::num(f.bootstrap.p[j]),
                           csv::num(f.d[j])});
    }
    for (auto [name, value] : std::vector<std::pair<std::string, double>>{
             {"AIC", f.model.aic},
             {"BIC", f.model.bic},
             {"Log Likelihood", f.model.loglik},
             {"Num. obs.", static_cast<double>(f.model.n_obs)},
             {"Num. groups", static_cast<double>(f.model.n_groups)},
             {"Var: group (Intercept)", f.model.var_random},
             {"Var: Residual", f.model.var_residual}})
      csv::write_row(out, {f.outcome, name, csv::num(value), "", "", "", "", ""});
  }
}

}  // namespace cowrite::stats
