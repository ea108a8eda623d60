#include "improbe/glm.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <ostream>

#include "improbe/csv.hpp"
#include "improbe/errors.hpp"
#include "improbe/stats.hpp"
#include "improbe/text.hpp"

namespace improbe::glm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logistic(double u) noexcept {
  if (u == kInf) return 1.0;
  if (u == -kInf) return 0.0;
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// Logistic density and its derivative; both vanish at +-inf.
double density(double u) noexcept {
  if (!std::isfinite(u)) return 0.0;
  const double F = logistic(u);
  return F * (1.0 - F);
}

double density_slope(double u) noexcept {
  if (!std::isfinite(u)) return 0.0;
  const double F = logistic(u);
  return F * (1.0 - F) * (1.0 - 2.0 * F);
}

// P(lower < latent <= upper) with both bounds already shifted by -eta.
double interval_prob(double a, double b) noexcept {
  if (b == -kInf) return logistic(a);
  if (a == kInf) return logistic(-b);
  if (a + b > 0) return logistic(-b) - logistic(-a);
  return logistic(a) - logistic(b);
}

std::vector<std::string> default_names(Eigen::Index d, std::vector<std::string> names) {
  if (names.empty()) {
    for (Eigen::Index j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(names.size()) != d) {
    fail(ErrorKind::invalid_argument, "coefficient names do not match the number of columns");
  }
  return names;
}

int check_ordinal(const Eigen::MatrixXd& X, std::span<const int> y) {
  if (X.rows() != static_cast<Eigen::Index>(y.size())) {
    fail(ErrorKind::invalid_argument, "X and y differ in length");
  }
  if (!X.allFinite()) fail(ErrorKind::invalid_argument, "non-finite covariates");
  if (y.empty()) fail(ErrorKind::invalid_argument, "no observations");
  const int K = *std::max_element(y.begin(), y.end());
  if (*std::min_element(y.begin(), y.end()) < 1) {
    fail(ErrorKind::invalid_argument, "ordinal responses must be >= 1");
  }
  if (K < 2) fail(ErrorKind::invalid_argument, "need at least two ordinal categories");
  std::vector<std::size_t> counts(static_cast<std::size_t>(K) + 1, 0);
  for (int v : y) ++counts[static_cast<std::size_t>(v)];
  for (int j = 1; j <= K; ++j) {
    if (counts[static_cast<std::size_t>(j)] == 0) {
      fail(ErrorKind::invalid_argument,
           "ordinal category " + std::to_string(j) + " has no observations");
    }
  }
  return K;
}

struct OrdinalEval {
  double ll = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

OrdinalEval ordinal_eval(const Eigen::MatrixXd& X, std::span<const int> y,
                         const Eigen::VectorXd& beta, const Eigen::VectorXd& cuts, bool want_hess) {
  const Eigen::Index d = X.cols();
  const Eigen::Index m = cuts.size();
  OrdinalEval e;
  e.grad = Eigen::VectorXd::Zero(d + m);
  if (want_hess) e.hess = Eigen::MatrixXd::Zero(d + m, d + m);
  const Eigen::VectorXd eta = X * beta;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const int cat = y[static_cast<std::size_t>(i)];
    const Eigen::Index up = cat - 1;    // cutpoint index of the upper bound, m when +inf
    const Eigen::Index lo = cat - 2;    // index of the lower bound, -1 when -inf
    const double a = up < m ? cuts[up] - eta[i] : kInf;
    const double b = lo >= 0 ? cuts[lo] - eta[i] : -kInf;
    const double P = interval_prob(a, b);
    if (!(P > 0.0)) {
      e.ll = -kInf;
      return e;
    }
    e.ll += std::log(P);
    const double fa = density(a), fb = density(b);
    const double dfa = density_slope(a), dfb = density_slope(b);
    const double diff = fa - fb;
    const auto x = X.row(i).transpose();
    e.grad.head(d) -= x * (diff / P);
    if (up < m) e.grad[d + up] += fa / P;
    if (lo >= 0) e.grad[d + lo] -= fb / P;
    if (!want_hess) continue;
    e.hess.topLeftCorner(d, d) += (x * x.transpose()) * ((dfa - dfb) / P - diff * diff / (P * P));
    if (up < m) {
      e.hess(d + up, d + up) += dfa / P - fa * fa / (P * P);
      const Eigen::VectorXd cross = -x * (dfa / P - diff * fa / (P * P));
      e.hess.block(0, d + up, d, 1) += cross;
      e.hess.block(d + up, 0, 1, d) += cross.transpose();
    }
    if (lo >= 0) {
      e.hess(d + lo, d + lo) += -dfb / P - fb * fb / (P * P);
      const Eigen::VectorXd cross = -x * (-dfb / P + diff * fb / (P * P));
      e.hess.block(0, d + lo, d, 1) += cross;
      e.hess.block(d + lo, 0, 1, d) += cross.transpose();
    }
    if (up < m && lo >= 0) {
      const double v = fa * fb / (P * P);
      e.hess(d + up, d + lo) += v;
      e.hess(d + lo, d + up) += v;
    }
  }
  return e;
}

bool strictly_increasing(const Eigen::VectorXd& v) {
  for (Eigen::Index j = 1; j < v.size(); ++j) {
    if (!(v[j] > v[j - 1])) return false;
  }
  return true;
}

Eigen::VectorXd sqrt_diag_inverse(const Eigen::MatrixXd& info, bool* ok) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  *ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
  if (!*ok) return Eigen::VectorXd::Zero(info.rows());
  const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  Eigen::VectorXd se(info.rows());
  for (Eigen::Index j = 0; j < se.size(); ++j) {
    if (!(cov(j, j) > 0.0)) *ok = false;
    se[j] = std::sqrt(std::max(cov(j, j), 0.0));
  }
  return se;
}

// log1p(x)/alpha^2 - mu/(alpha(1+x)) with x = alpha*mu, accurate as alpha -> 0.
double nb_alpha_tail(double alpha, double mu) {
  const double x = alpha * mu;
  if (x < 1e-3) {
    // mu^2 * sum_{k>=2} (-1)^k (k-1)/k x^(k-2)
    double sum = 0.0, pow = 1.0;
    for (int k = 2; k < 12; ++k) {
      sum += ((k % 2 == 0) ? 1.0 : -1.0) * (k - 1.0) / k * pow;
      pow *= x;
    }
    return mu * mu * sum;
  }
  return std::log1p(x) / (alpha * alpha) - mu / (alpha * (1.0 + x));
}

Eigen::VectorXd nb_mean(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta) {
  Eigen::VectorXd mu = X * beta;
  for (Eigen::Index i = 0; i < mu.size(); ++i) mu[i] = std::exp(std::min(mu[i], 700.0));
  return mu;
}

struct InnerFit {
  Eigen::VectorXd beta;
  double ll = -kInf;
  bool converged = false;
  int iterations = 0;
};

// Newton on beta for fixed alpha, observed information, step halving.
InnerFit nb_fit_beta(const Eigen::MatrixXd& X, std::span<const int> y, double alpha,
                     Eigen::VectorXd beta, int max_iter) {
  InnerFit out;
  double ll = nb_log_likelihood(X, y, beta, alpha);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd mu = nb_mean(X, beta);
    Eigen::VectorXd r(mu.size()), w(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      const double yi = y[static_cast<std::size_t>(i)];
      const double A = 1.0 + alpha * mu[i];
      r[i] = (yi - mu[i]) / A;
      w[i] = mu[i] * (1.0 + alpha * yi) / (A * A);
    }
    const Eigen::VectorXd g = X.transpose() * r;
    const Eigen::MatrixXd info = X.transpose() * (X.array().colwise() * w.array()).matrix();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    Eigen::VectorXd step = ldlt.solve(g);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) step = g;
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
      const Eigen::VectorXd cand = beta + t * step;
      const double v = nb_log_likelihood(X, y, cand, alpha);
      if (std::isfinite(v) && v >= ll) {
        const double change = v - ll;
        beta = cand;
        ll = v;
        moved = true;
        out.iterations = it + 1;
        if (change < 1e-11) out.converged = true;
        break;
      }
    }
    if (!moved) {
      out.converged = g.lpNorm<Eigen::Infinity>() < 1e-6;
      break;
    }
    if (out.converged) break;
  }
  out.beta = std::move(beta);
  out.ll = ll;
  return out;
}

}  // namespace

double ordinal_log_likelihood(const Eigen::MatrixXd& X, std::span<const int> y,
                              const Eigen::VectorXd& beta, const Eigen::VectorXd& cutpoints) {
  return ordinal_eval(X, y, beta, cutpoints, false).ll;
}

Eigen::VectorXd ordinal_score(const Eigen::MatrixXd& X, std::span<const int> y,
                              const Eigen::VectorXd& beta, const Eigen::VectorXd& cutpoints) {
  return ordinal_eval(X, y, beta, cutpoints, false).grad;
}

Eigen::VectorXd ordinal_probabilities(const Eigen::VectorXd& beta, const Eigen::VectorXd& cutpoints,
                                      const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double eta = beta.dot(x);
  const Eigen::Index K = cutpoints.size() + 1;
  Eigen::VectorXd p(K);
  for (Eigen::Index j = 0; j < K; ++j) {
    const double a = j < K - 1 ? cutpoints[j] - eta : kInf;
    const double b = j > 0 ? cutpoints[j - 1] - eta : -kInf;
    p[j] = interval_prob(a, b);
  }
  return p;
}

GlmFit fit_ordered_logistic(const Eigen::MatrixXd& X, std::span<const int> y,
                            std::vector<std::string> names, const FitOptions& options) {
  const int K = check_ordinal(X, y);
  const Eigen::Index d = X.cols();
  const Eigen::Index n = X.rows();
  if (!(n > d + K)) {
    fail(ErrorKind::invalid_argument, "ordered logistic needs more observations than d + K");
  }

  GlmFit fit;
  fit.family = Family::ordered_logistic;
  fit.names = default_names(d, std::move(names));

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd cuts(K - 1);
  {
    std::vector<double> counts(static_cast<std::size_t>(K), 0.0);
    for (int v : y) counts[static_cast<std::size_t>(v - 1)] += 1.0;
    double cum = 0.0;
    for (int j = 0; j < K - 1; ++j) {
      cum += counts[static_cast<std::size_t>(j)] / static_cast<double>(n);
      cuts[j] = std::log(cum / (1.0 - cum));
    }
  }

  OrdinalEval e = ordinal_eval(X, y, beta, cuts, true);
  const Eigen::Index p = d + K - 1;
  for (int it = 0; it < options.max_iter; ++it) {
    fit.iterations = it + 1;
    const Eigen::MatrixXd info = -e.hess;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    Eigen::VectorXd step = ldlt.solve(e.grad);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !step.allFinite()) {
      step = e.grad;
    }
    double t = 1.0;
    bool moved = false;
    double change = 0.0;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Eigen::VectorXd b_new = beta + t * step.head(d);
      const Eigen::VectorXd c_new = cuts + t * step.tail(K - 1);
      if (!strictly_increasing(c_new)) continue;
      const double ll_new = ordinal_log_likelihood(X, y, b_new, c_new);
      if (std::isfinite(ll_new) && ll_new >= e.ll) {
        change = ll_new - e.ll;
        beta = b_new;
        cuts = c_new;
        moved = true;
        break;
      }
    }
    if (beta.norm() > options.separation_norm) {
      fail(ErrorKind::numeric, "separation detected: coefficient norm exceeds " +
                                   format_double(options.separation_norm));
    }
    if (!moved) {
      fit.converged = e.grad.lpNorm<Eigen::Infinity>() < 1e-6;
      break;
    }
    e = ordinal_eval(X, y, beta, cuts, true);
    if (change < options.ll_tol) {
      fit.converged = true;
      break;
    }
  }

  // Complete separation stalls with a vanishing loss before the norm bound trips.
  if (-e.ll < 1e-6 * static_cast<double>(n)) {
    fail(ErrorKind::numeric, "separation detected: every observation fitted with probability near 1");
  }

  fit.coefficients = beta;
  fit.cutpoints = cuts;
  fit.log_likelihood = e.ll;
  bool ok = false;
  const Eigen::VectorXd se = sqrt_diag_inverse(-e.hess, &ok);
  if (!ok) fit.converged = false;
  fit.std_errors = se.head(d);
  fit.cutpoint_std_errors = se.tail(p - d);
  fit.p_values = fit.converged ? wald_pvalues(fit) : Eigen::VectorXd::Ones(d);
  return fit;
}

double nb_log_likelihood(const Eigen::MatrixXd& X, std::span<const int> y,
                         const Eigen::VectorXd& beta, double alpha) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const int yi = y[static_cast<std::size_t>(i)];
    const double mu = std::exp(std::min(eta[i], 700.0));
    const double x = alpha * mu;
    // sum_{j<y} log(1 + j alpha) replaces lgamma(y + 1/alpha) - lgamma(1/alpha) - y log(alpha).
    double gamma_ratio = 0.0;
    for (int j = 1; j < yi; ++j) gamma_ratio += std::log1p(j * alpha);
    ll += gamma_ratio + yi * std::min(eta[i], 700.0) - yi * std::log1p(x) -
          (x < 1e-8 ? mu * (1.0 - 0.5 * x) : std::log1p(x) / alpha) - std::lgamma(yi + 1.0);
  }
  return ll;
}

Eigen::VectorXd nb_score(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::VectorXd& beta,
                         double alpha) {
  const Eigen::VectorXd mu = nb_mean(X, beta);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(X.cols() + 1);
  double g_alpha = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const int yi = y[static_cast<std::size_t>(i)];
    const double A = 1.0 + alpha * mu[i];
    g.head(X.cols()) += X.row(i).transpose() * ((yi - mu[i]) / A);
    for (int j = 1; j < yi; ++j) g_alpha += j / (1.0 + j * alpha);
    g_alpha += -yi * mu[i] / A + nb_alpha_tail(alpha, mu[i]);
  }
  g[X.cols()] = g_alpha;
  return g;
}

double poisson_log_likelihood(const Eigen::MatrixXd& X, std::span<const int> y,
                              const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const int yi = y[static_cast<std::size_t>(i)];
    ll += yi * eta[i] - std::exp(eta[i]) - std::lgamma(yi + 1.0);
  }
  return ll;
}

GlmFit fit_negative_binomial(const Eigen::MatrixXd& X_in, std::span<const int> y,
                             std::vector<std::string> names, const NbOptions& options) {
  if (X_in.rows() != static_cast<Eigen::Index>(y.size())) {
    fail(ErrorKind::invalid_argument, "X and y differ in length");
  }
  if (!X_in.allFinite()) fail(ErrorKind::invalid_argument, "non-finite covariates");
  if (std::any_of(y.begin(), y.end(), [](int v) { return v < 0; })) {
    fail(ErrorKind::invalid_argument, "counts must be nonnegative");
  }
  if (std::none_of(y.begin(), y.end(), [](int v) { return v > 0; })) {
    fail(ErrorKind::invalid_argument, "all counts are zero");
  }

  names = default_names(X_in.cols(), std::move(names));
  Eigen::MatrixXd X;
  if (options.intercept) {
    X.resize(X_in.rows(), X_in.cols() + 1);
    X.col(0).setOnes();
    X.rightCols(X_in.cols()) = X_in;
    names.insert(names.begin(), "(Intercept)");
  } else {
    X = X_in;
  }
  const Eigen::Index d = X.cols();
  if (!(X.rows() > d + 2)) {
    fail(ErrorKind::invalid_argument, "negative binomial needs more observations than d + 2");
  }

  Eigen::VectorXd start = Eigen::VectorXd::Zero(d);
  if (options.intercept) {
    double m = 0.0;
    for (int v : y) m += v;
    start[0] = std::log(m / static_cast<double>(y.size()));
  }

  const double lo = std::log(options.min_dispersion);
  const double hi = std::log(options.max_dispersion);
  Eigen::VectorXd warm = nb_fit_beta(X, y, options.min_dispersion, start, options.max_iter).beta;
  int evaluations = 0;
  auto neg_profile = [&](double log_alpha) {
    ++evaluations;
    const InnerFit f = nb_fit_beta(X, y, std::exp(log_alpha), warm, options.max_iter);
    return -f.ll;
  };
  const auto [log_alpha, neg_ll] = boost::math::tools::brent_find_minima(
      neg_profile, lo, hi, std::numeric_limits<double>::digits / 2);
  double alpha = std::exp(log_alpha);
  InnerFit best = nb_fit_beta(X, y, alpha, warm, options.max_iter);
  // Brent never evaluates the endpoint; the profile can peak at the Poisson limit.
  InnerFit poisson = nb_fit_beta(X, y, 0.0, warm, options.max_iter);
  if (poisson.ll >= std::max(best.ll, -neg_ll)) {
    alpha = 0.0;
    best = std::move(poisson);
  }

  GlmFit fit;
  fit.family = Family::negative_binomial;
  fit.names = names;
  fit.coefficients = best.beta;
  fit.dispersion = alpha;
  fit.log_likelihood = best.ll;
  fit.iterations = evaluations;
  fit.converged = best.converged;
  if (fit.coefficients.norm() > options.separation_norm) {
    fail(ErrorKind::numeric, "coefficient norm exceeds " + format_double(options.separation_norm));
  }

  // Observed information over (beta, alpha); the beta block alone when alpha
  // sits at the Poisson boundary.
  const Eigen::VectorXd mu = nb_mean(X, fit.coefficients);
  const bool interior = alpha > 1e3 * options.min_dispersion;
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(d + 1, d + 1);
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double yi = y[static_cast<std::size_t>(i)];
    const double A = 1.0 + alpha * mu[i];
    const auto x = X.row(i).transpose();
    info.topLeftCorner(d, d) += (x * x.transpose()) * (mu[i] * (1.0 + alpha * yi) / (A * A));
    if (!interior) continue;
    const Eigen::VectorXd cross = x * (mu[i] * (mu[i] - yi) / (A * A));
    info.block(0, d, d, 1) -= cross;
    info.block(d, 0, 1, d) -= cross.transpose();
    double h = 0.0;
    for (int j = 1; j < static_cast<int>(yi); ++j) h -= (j * j) / ((1.0 + j * alpha) * (1.0 + j * alpha));
    h += yi * mu[i] * mu[i] / (A * A) + mu[i] / (alpha * alpha * A) -
         2.0 * std::log(A) / (alpha * alpha * alpha) +
         mu[i] * (1.0 + 2.0 * alpha * mu[i]) / (alpha * alpha * A * A);
    info(d, d) -= h;
  }
  bool ok = false;
  if (interior) {
    const Eigen::VectorXd se = sqrt_diag_inverse(info, &ok);
    fit.std_errors = se.head(d);
    fit.dispersion_std_error = se[d];
  } else {
    fit.std_errors = sqrt_diag_inverse(info.topLeftCorner(d, d), &ok);
  }
  if (!ok) fit.converged = false;
  fit.p_values = fit.converged ? wald_pvalues(fit) : Eigen::VectorXd::Ones(d);
  return fit;
}

Eigen::VectorXd wald_pvalues(const GlmFit& fit) {
  if (!fit.converged) fail(ErrorKind::numeric, "Wald p-values need a converged fit");
  Eigen::VectorXd p(fit.coefficients.size());
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double b = fit.coefficients[j];
    const double se = fit.std_errors[j];
    if (b == 0.0) {
      p[j] = 1.0;
    } else if (!(se > 0.0)) {
      fail(ErrorKind::numeric, "nonpositive standard error for '" + fit.names[static_cast<std::size_t>(j)] + "'");
    } else {
      p[j] = stats::normal_two_sided_p(b / se);
    }
  }
  return p;
}

std::string significance_stars(double p) {
  if (p <= 0.001) return "**";
  if (p <= 0.05) return "*";
  return "";
}

void write_fit_report(std::ostream& out, const GlmFit& fit) {
  CsvWriter csv(out);
  csv.row({"variable", "coef", "se", "p", "stars"});
  for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
    const double p = fit.p_values.size() > j ? fit.p_values[j] : 1.0;
    csv.row({fit.names[static_cast<std::size_t>(j)], format_double(fit.coefficients[j]),
             format_double(fit.std_errors[j]), format_double(p), significance_stars(p)});
  }
  if (fit.family == Family::ordered_logistic) {
    for (Eigen::Index j = 0; j < fit.cutpoints.size(); ++j) {
      csv.row({"cut" + std::to_string(j + 1) + "|" + std::to_string(j + 2),
               format_double(fit.cutpoints[j]), format_double(fit.cutpoint_std_errors[j]), "", ""});
    }
  } else {
    csv.row({"alpha", format_double(fit.dispersion), format_double(fit.dispersion_std_error), "", ""});
  }
  csv.row({"log_likelihood", format_double(fit.log_likelihood), "", "", ""});
}

TTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::invalid_argument, "paired samples differ in length");
  if (a.size() < 2) fail(ErrorKind::invalid_argument, "paired t-test needs at least two pairs");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  TTest out;
  out.df = static_cast<int>(a.size()) - 1;
  if (std::all_of(diff.begin(), diff.end(), [](double v) { return v == 0.0; })) return out;
  const double sd = stats::sample_sd(diff);
  if (!(sd > 0.0)) fail(ErrorKind::numeric, "paired differences have zero variance");
  out.t = stats::mean(diff) / (sd / std::sqrt(static_cast<double>(a.size())));
  out.p = stats::t_two_sided_p(out.t, out.df);
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::invalid_argument, "correlation inputs differ in length");
  const double mx = stats::mean(x), my = stats::mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorKind::numeric, "correlation of a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Correlations correlations(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 3) fail(ErrorKind::invalid_argument, "correlations need at least three points");
  const double df = static_cast<double>(x.size()) - 2.0;
  auto p_of = [df](double r) {
    if (std::fabs(r) >= 1.0) return 0.0;
    return stats::t_two_sided_p(r * std::sqrt(df / (1.0 - r * r)), df);
  };
  Correlations c;
  c.pearson_r = pearson(x, y);
  c.pearson_p = p_of(c.pearson_r);
  const auto rx = stats::average_ranks(x);
  const auto ry = stats::average_ranks(y);
  c.spearman_r = pearson(rx, ry);
  c.spearman_p = p_of(c.spearman_r);
  return c;
}

}  // namespace improbe::glm
