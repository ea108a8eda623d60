#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "improbe/dataset.hpp"
#include "improbe/types.hpp"

namespace improbe::probes {

struct ProbeModel {
  Dimension dimension = Dimension::warmth;
  int layer = 0;
  ActivationKind kind = ActivationKind::mlp;
  Eigen::VectorXd weights;
  double bias = 0.0;
  double reg_lambda = 0.0;
  double train_fraction = 1.0;
  int fold = -1;  // -1: trained on all labeled data
  std::uint64_t seed = 0;
  int iterations = 0;
  bool converged = false;
};

struct TrainOptions {
  // Strength of the (lambda/2)||w||^2 penalty on the mean loss. nullopt uses
  // 1/n, the mean-loss equivalent of an inverse-regularisation C = 1.
  // Zero gives the unpenalised maximum-likelihood fit.
  std::optional<double> reg_lambda;
  bool standardize = false;  // z-score features, folded back into the weights
  double grad_tol = 1e-7;    // on the infinity norm of the gradient
  int max_iter = 1000;
};

// Mean logistic loss plus (lambda/2)||w||^2. y holds 0/1. The bias is not penalised.
double logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& w, double b, double lambda);
// Gradient of logistic_objective; last entry is d/db.
Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& w, double b, double lambda);

// Newton's method (dense for small d, conjugate-gradient inner solve
// otherwise) with Armijo backtracking. No randomness is involved; `seed` is
// recorded for provenance.
ProbeModel train_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const TrainOptions& options = {}, std::uint64_t seed = 0);

double score(const ProbeModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
double predict_proba(const ProbeModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
// One probability per row.
Eigen::VectorXd predict_proba_rows(const ProbeModel& model, const Eigen::MatrixXd& X);

// 2p - 1.
double scale_bipolar(double p);

double sigmoid(double s) noexcept;

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  double precision() const noexcept;
  double recall() const noexcept;
  double f1() const noexcept;  // 0 when there are no true or predicted positives
  double accuracy() const noexcept;
};

// Positive class is Direction::high.
Confusion confusion(std::span<const Direction> truth, std::span<const Direction> predicted);

struct CvResult {
  double mean_f1 = 0.0, ci95_f1 = 0.0;
  double mean_acc = 0.0, ci95_acc = 0.0;
  std::vector<double> fold_f1, fold_acc;
};

struct CvOptions {
  int k = 5;
  double fraction = 1.0;  // share of the training folds used, stratified
  TrainOptions train;
  std::uint64_t seed = 0;
};

// Any classifier trained on one split and applied to another.
using FitPredict = std::function<std::vector<Direction>(
    const std::vector<std::size_t>& train_rows, const std::vector<std::size_t>& test_rows,
    std::uint64_t job_seed)>;

// Fold and subsample mechanics shared by probes and the BOW baseline.
CvResult cross_validate_with(std::span<const Direction> labels, const CvOptions& options,
                             const FitPredict& fit_predict);

CvResult cross_validate(const Eigen::MatrixXd& X, std::span<const Direction> labels,
                        const CvOptions& options);

// Restricts a dataset matrix to rows labeled on `dimension`.
struct LabeledMatrix {
  Eigen::MatrixXd X;
  std::vector<Direction> y;
  std::vector<std::size_t> rows;  // prompt index of each row
};
LabeledMatrix labeled_matrix(const dataset::Dataset& data, Dimension dimension, int layer,
                             ActivationKind kind);

CvResult cross_validate(const dataset::Dataset& data, Dimension dimension, int layer,
                        ActivationKind kind, const CvOptions& options);

struct ReportRow {
  int layer = 0;
  double fraction = 1.0;
  CvResult result;
};

struct ProbeReport {
  Dimension dimension = Dimension::warmth;
  ActivationKind kind = ActivationKind::mlp;
  std::vector<ReportRow> rows;         // fraction-major, then layer
  std::map<double, int> best_layer;    // per fraction; ties go to the lowest layer
  std::optional<double> baseline_f1;   // reference line, e.g. from the BOW classifier
};

struct SweepOptions {
  std::vector<double> fractions{1.0};
  CvOptions cv;
  int jobs = 1;
  std::optional<double> baseline_f1;
};

// Features of one layer, labeled rows only, aligned with `labels`.
using LayerSource = std::function<Eigen::MatrixXd(int layer)>;

ProbeReport layer_sweep(int num_layers, const LayerSource& layers, std::span<const Direction> labels,
                        Dimension dimension, ActivationKind kind, const SweepOptions& options);
ProbeReport layer_sweep(const dataset::Dataset& data, Dimension dimension, ActivationKind kind,
                        const SweepOptions& options);

// layer,fraction,mean_f1,ci_f1,mean_acc,ci_acc
void write_report_csv(std::ostream& out, const ProbeReport& report);
// series,layer,fraction,metric,value,ci,best
void write_report_long(std::ostream& out, const ProbeReport& report);

// Binary probe file: magic, JSON metadata header, little-endian float64 weights.
void save_probe(const std::filesystem::path& path, const ProbeModel& model);
ProbeModel load_probe(const std::filesystem::path& path);

}  // namespace improbe::probes
