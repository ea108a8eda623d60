#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace improbe::glm {

enum class Family { ordered_logistic, negative_binomial };

struct GlmFit {
  Family family = Family::ordered_logistic;
  std::vector<std::string> names;  // one per coefficient
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd p_values;
  Eigen::VectorXd cutpoints;       // ordered_logistic: strictly increasing, K-1 entries
  Eigen::VectorXd cutpoint_std_errors;
  double dispersion = 0.0;         // negative_binomial: alpha in Var = mu + alpha mu^2; 0 at the Poisson limit
  double dispersion_std_error = 0.0;
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct FitOptions {
  double ll_tol = 1e-9;            // stop when the log-likelihood changes by less
  int max_iter = 200;
  double separation_norm = 1e4;    // ||beta|| beyond this is reported as separation
};

// ---- ordered logistic (proportional odds) ----
// P(y <= j | x) = sigmoid(c_j - x.beta), y in 1..K. X carries no intercept
// column; the cutpoints play that role.
GlmFit fit_ordered_logistic(const Eigen::MatrixXd& X, std::span<const int> y,
                            std::vector<std::string> names = {}, const FitOptions& options = {});

double ordinal_log_likelihood(const Eigen::MatrixXd& X, std::span<const int> y,
                              const Eigen::VectorXd& beta, const Eigen::VectorXd& cutpoints);
// Gradient with respect to (beta, cutpoints), stacked in that order.
Eigen::VectorXd ordinal_score(const Eigen::MatrixXd& X, std::span<const int> y,
                              const Eigen::VectorXd& beta, const Eigen::VectorXd& cutpoints);
// P(y = j | x) for j = 1..K.
Eigen::VectorXd ordinal_probabilities(const Eigen::VectorXd& beta, const Eigen::VectorXd& cutpoints,
                                      const Eigen::Ref<const Eigen::VectorXd>& x);

// ---- negative binomial (NB2, log link) ----
struct NbOptions : FitOptions {
  bool intercept = true;     // prepend a "(Intercept)" column to X
  double min_dispersion = 1e-8;
  double max_dispersion = 1e4;
};

GlmFit fit_negative_binomial(const Eigen::MatrixXd& X, std::span<const int> y,
                             std::vector<std::string> names = {}, const NbOptions& options = {});

// X here is the design actually used (including any intercept column).
double nb_log_likelihood(const Eigen::MatrixXd& X, std::span<const int> y,
                         const Eigen::VectorXd& beta, double alpha);
// Gradient with respect to (beta, alpha).
Eigen::VectorXd nb_score(const Eigen::MatrixXd& X, std::span<const int> y,
                         const Eigen::VectorXd& beta, double alpha);
double poisson_log_likelihood(const Eigen::MatrixXd& X, std::span<const int> y,
                              const Eigen::VectorXd& beta);

// Two-sided normal-approximation p-value of beta/SE per coefficient.
Eigen::VectorXd wald_pvalues(const GlmFit& fit);
// "**" for p <= 0.001, "*" for p <= 0.05.
std::string significance_stars(double p);

// variable,coef,se,p,stars. The se column holds standard errors.
void write_fit_report(std::ostream& out, const GlmFit& fit);

struct TTest {
  double t = 0.0;
  double p = 1.0;
  int df = 0;
};
// Paired t-test on a - b. All-zero differences give t = 0, p = 1.
TTest paired_t_test(std::span<const double> a, std::span<const double> b);

struct Correlations {
  double pearson_r = 0.0, pearson_p = 1.0;
  double spearman_r = 0.0, spearman_p = 1.0;
};
Correlations correlations(std::span<const double> x, std::span<const double> y);
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace improbe::glm
