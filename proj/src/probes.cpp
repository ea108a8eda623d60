#include "improbe/probes.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "improbe/csv.hpp"
#include "improbe/errors.hpp"
#include "improbe/hashing.hpp"
#include "improbe/stats.hpp"
#include "improbe/text.hpp"
#include "json.hpp"

namespace improbe::probes {
namespace {

constexpr int kDenseNewtonMaxParams = 512;

double softplus(double s) noexcept { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

void check_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) fail(ErrorKind::invalid_argument, "X and y differ in length");
  if (X.rows() < 2) fail(ErrorKind::invalid_argument, "need at least two training rows");
  if (!X.allFinite()) fail(ErrorKind::invalid_argument, "non-finite features");
  bool has0 = false, has1 = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) {
      has0 = true;
    } else if (y[i] == 1.0) {
      has1 = true;
    } else {
      fail(ErrorKind::invalid_argument, "labels must be 0 or 1");
    }
  }
  if (!has0 || !has1) fail(ErrorKind::invalid_argument, "single-class training labels");
}

// Objective and gradient over theta = [w; b].
struct Logistic {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  double lambda;
  double inv_n;

  Logistic(const Eigen::MatrixXd& X_, const Eigen::VectorXd& y_, double lambda_)
      : X(X_), y(y_), lambda(lambda_), inv_n(1.0 / static_cast<double>(X_.rows())) {}

  Eigen::Index dim() const { return X.cols(); }

  Eigen::VectorXd scores(const Eigen::VectorXd& theta) const {
    return (X * theta.head(dim())).array() + theta[dim()];
  }

  double value(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd s = scores(theta);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) loss += softplus(s[i]) - y[i] * s[i];
    return loss * inv_n + 0.5 * lambda * theta.head(dim()).squaredNorm();
  }

  // Returns the gradient; fills the Hessian weights p(1-p) when requested.
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta, Eigen::VectorXd* curvature) const {
    const Eigen::VectorXd s = scores(theta);
    Eigen::VectorXd r(s.size());
    if (curvature) curvature->resize(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double p = sigmoid(s[i]);
      r[i] = p - y[i];
      if (curvature) (*curvature)[i] = p * (1.0 - p);
    }
    Eigen::VectorXd g(dim() + 1);
    g.head(dim()) = X.transpose() * r * inv_n + lambda * theta.head(dim());
    g[dim()] = r.sum() * inv_n;
    return g;
  }

  Eigen::VectorXd hess_vec(const Eigen::VectorXd& curvature, const Eigen::VectorXd& v) const {
    const Eigen::VectorXd u =
        (curvature.array() * ((X * v.head(dim())).array() + v[dim()])).matrix();
    Eigen::VectorXd out(dim() + 1);
    out.head(dim()) = X.transpose() * u * inv_n + lambda * v.head(dim());
    out[dim()] = u.sum() * inv_n;
    return out;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& curvature) const {
    const Eigen::Index d = dim();
    Eigen::MatrixXd H(d + 1, d + 1);
    const Eigen::MatrixXd DX = X.array().colwise() * curvature.array();
    H.topLeftCorner(d, d) = X.transpose() * DX * inv_n;
    H.topLeftCorner(d, d).diagonal().array() += lambda;
    const Eigen::VectorXd cross = DX.colwise().sum().transpose() * inv_n;
    H.topRightCorner(d, 1) = cross;
    H.bottomLeftCorner(1, d) = cross.transpose();
    H(d, d) = curvature.sum() * inv_n;
    return H;
  }
};

// Truncated conjugate gradient for H p = -g.
Eigen::VectorXd cg_direction(const Logistic& f, const Eigen::VectorXd& curvature,
                             const Eigen::VectorXd& g) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(g.size());
  Eigen::VectorXd r = -g;
  Eigen::VectorXd dir = r;
  double rr = r.squaredNorm();
  const double tol = std::min(0.5, std::sqrt(g.norm())) * g.norm();
  const int max_cg = static_cast<int>(std::min<Eigen::Index>(g.size(), 250));
  for (int it = 0; it < max_cg && std::sqrt(rr) > tol; ++it) {
    const Eigen::VectorXd Hd = f.hess_vec(curvature, dir);
    const double dHd = dir.dot(Hd);
    if (dHd <= 0.0) break;
    const double a = rr / dHd;
    p += a * dir;
    r -= a * Hd;
    const double rr_new = r.squaredNorm();
    dir = r + (rr_new / rr) * dir;
    rr = rr_new;
  }
  if (p.isZero(0.0)) p = -g;
  return p;
}

Eigen::VectorXd labels_to_binary(std::span<const Direction> labels) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = labels[i] == Direction::high ? 1.0 : 0.0;
  }
  return y;
}

std::string fraction_label(double f) { return format_double(f); }

}  // namespace

double sigmoid(double s) noexcept {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& w, double b, double lambda) {
  Eigen::VectorXd theta(w.size() + 1);
  theta << w, b;
  return Logistic(X, y, lambda).value(theta);
}

Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& w, double b, double lambda) {
  Eigen::VectorXd theta(w.size() + 1);
  theta << w, b;
  return Logistic(X, y, lambda).gradient(theta, nullptr);
}

ProbeModel train_logistic(const Eigen::MatrixXd& X_raw, const Eigen::VectorXd& y,
                          const TrainOptions& options, std::uint64_t seed) {
  check_inputs(X_raw, y);
  const double lambda = options.reg_lambda.value_or(1.0 / static_cast<double>(X_raw.rows()));
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    fail(ErrorKind::invalid_argument, "reg_lambda must be finite and >= 0");
  }

  Eigen::RowVectorXd center, scale;
  Eigen::MatrixXd X_std;
  if (options.standardize) {
    center = X_raw.colwise().mean();
    scale = ((X_raw.rowwise() - center).array().square().colwise().sum() /
             static_cast<double>(X_raw.rows()))
                .sqrt();
    for (Eigen::Index j = 0; j < scale.size(); ++j) {
      if (scale[j] == 0.0) scale[j] = 1.0;
    }
    X_std = (X_raw.rowwise() - center).array().rowwise() / scale.array();
  }
  const Eigen::MatrixXd& X = options.standardize ? X_std : X_raw;

  const Logistic f(X, y, lambda);
  const Eigen::Index n_params = X.cols() + 1;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n_params);
  {
    // Start the bias at the log prior odds.
    const double p = y.mean();
    theta[X.cols()] = std::log(p / (1.0 - p));
  }

  ProbeModel model;
  double value = f.value(theta);
  Eigen::VectorXd curvature;
  int it = 0;
  for (; it < options.max_iter; ++it) {
    const Eigen::VectorXd g = f.gradient(theta, &curvature);
    if (g.lpNorm<Eigen::Infinity>() <= options.grad_tol) {
      model.converged = true;
      break;
    }
    Eigen::VectorXd step;
    if (n_params <= kDenseNewtonMaxParams) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(f.hessian(curvature));
      step = ldlt.solve(-g);
      if (ldlt.info() != Eigen::Success || !step.allFinite() || step.dot(g) >= 0.0) {
        step = cg_direction(f, curvature, g);
      }
    } else {
      step = cg_direction(f, curvature, g);
    }
    const double slope = step.dot(g);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Eigen::VectorXd cand = theta + t * step;
      const double v = f.value(cand);
      if (std::isfinite(v) && v <= value + 1e-4 * t * slope) {
        theta = cand;
        value = v;
        moved = true;
        break;
      }
    }
    if (!moved) {
      // At the floating-point floor of the objective; accept if near-stationary.
      model.converged = g.lpNorm<Eigen::Infinity>() <= std::sqrt(options.grad_tol);
      break;
    }
  }

  model.iterations = it;
  model.reg_lambda = lambda;
  model.seed = seed;
  Eigen::VectorXd w = theta.head(X.cols());
  double b = theta[X.cols()];
  if (options.standardize) {
    const Eigen::VectorXd w_raw = (w.array() / scale.transpose().array()).matrix();
    b -= w_raw.dot(center.transpose());
    w = w_raw;
  }
  model.weights = std::move(w);
  model.bias = b;
  if (!model.weights.allFinite() || !std::isfinite(model.bias)) {
    fail(ErrorKind::numeric, "logistic fit diverged");
  }
  return model;
}

double score(const ProbeModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.weights.size()) {
    fail(ErrorKind::invalid_argument, "feature dimension " + std::to_string(x.size()) +
                                          " does not match probe dimension " +
                                          std::to_string(model.weights.size()));
  }
  return model.weights.dot(x) + model.bias;
}

double predict_proba(const ProbeModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return sigmoid(score(model, x));
}

Eigen::VectorXd predict_proba_rows(const ProbeModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.weights.size()) {
    fail(ErrorKind::invalid_argument, "feature dimension does not match probe dimension");
  }
  Eigen::VectorXd s = (X * model.weights).array() + model.bias;
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = sigmoid(s[i]);
  return s;
}

double scale_bipolar(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    fail(ErrorKind::invalid_argument, "probability " + format_double(p) + " outside [0,1]");
  }
  return 2.0 * p - 1.0;
}

double Confusion::precision() const noexcept {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double Confusion::recall() const noexcept {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double Confusion::f1() const noexcept {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double Confusion::accuracy() const noexcept {
  const std::size_t n = tp + fp + tn + fn;
  return n == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
}

Confusion confusion(std::span<const Direction> truth, std::span<const Direction> predicted) {
  if (truth.size() != predicted.size()) {
    fail(ErrorKind::invalid_argument, "truth and predictions differ in length");
  }
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == Direction::high;
    const bool p = predicted[i] == Direction::high;
    if (t && p) ++c.tp;
    else if (!t && p) ++c.fp;
    else if (!t && !p) ++c.tn;
    else ++c.fn;
  }
  return c;
}

CvResult cross_validate_with(std::span<const Direction> labels, const CvOptions& options,
                             const FitPredict& fit_predict) {
  if (!(options.fraction > 0.0 && options.fraction <= 1.0)) {
    fail(ErrorKind::invalid_argument, "training fraction must be in (0,1]");
  }
  const auto folds = dataset::stratified_folds(labels, options.k, options.seed);
  CvResult out;
  for (int f = 0; f < options.k; ++f) {
    std::vector<std::size_t> high, low, test;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (folds[i] == f) {
        test.push_back(i);
      } else {
        (labels[i] == Direction::high ? high : low).push_back(i);
      }
    }
    if (options.fraction < 1.0) {
      std::mt19937_64 rng(derive_seed(options.seed, static_cast<std::uint64_t>(f),
                                      std::bit_cast<std::uint64_t>(options.fraction)));
      for (auto* cls : {&high, &low}) {
        auto& v = *cls;
        for (std::size_t i = v.size(); i > 1; --i) {
          const auto j = static_cast<std::size_t>(
              (static_cast<unsigned __int128>(rng()) * static_cast<unsigned __int128>(i)) >> 64);
          std::swap(v[i - 1], v[j]);
        }
        const auto keep = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(options.fraction * static_cast<double>(v.size()))));
        v.resize(std::min(keep, v.size()));
      }
    }
    std::vector<std::size_t> train;
    train.reserve(high.size() + low.size());
    train.insert(train.end(), high.begin(), high.end());
    train.insert(train.end(), low.begin(), low.end());
    std::sort(train.begin(), train.end());

    const auto predicted = fit_predict(train, test, derive_seed(options.seed, static_cast<std::uint64_t>(f)));
    std::vector<Direction> truth;
    truth.reserve(test.size());
    for (auto i : test) truth.push_back(labels[i]);
    const Confusion c = confusion(truth, predicted);
    out.fold_f1.push_back(c.f1());
    out.fold_acc.push_back(c.accuracy());
  }
  out.mean_f1 = stats::mean(out.fold_f1);
  out.ci95_f1 = stats::ci95_half_width(out.fold_f1);
  out.mean_acc = stats::mean(out.fold_acc);
  out.ci95_acc = stats::ci95_half_width(out.fold_acc);
  return out;
}

CvResult cross_validate(const Eigen::MatrixXd& X, std::span<const Direction> labels,
                        const CvOptions& options) {
  if (X.rows() != static_cast<Eigen::Index>(labels.size())) {
    fail(ErrorKind::invalid_argument, "X and labels differ in length");
  }
  const Eigen::VectorXd y = labels_to_binary(labels);
  return cross_validate_with(
      labels, options,
      [&](const std::vector<std::size_t>& train, const std::vector<std::size_t>& test,
          std::uint64_t job_seed) {
        const Eigen::MatrixXd Xtr = X(train, Eigen::all);
        const Eigen::VectorXd ytr = y(train);
        const ProbeModel m = train_logistic(Xtr, ytr, options.train, job_seed);
        const Eigen::VectorXd p = predict_proba_rows(m, Eigen::MatrixXd(X(test, Eigen::all)));
        std::vector<Direction> out;
        out.reserve(test.size());
        for (Eigen::Index i = 0; i < p.size(); ++i) {
          out.push_back(p[i] >= 0.5 ? Direction::high : Direction::low);
        }
        return out;
      });
}

LabeledMatrix labeled_matrix(const dataset::Dataset& data, Dimension dimension, int layer,
                             ActivationKind kind) {
  const auto labels = data.labels(dimension);
  LabeledMatrix out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      out.rows.push_back(i);
      out.y.push_back(*labels[i]);
    }
  }
  if (out.rows.empty()) {
    fail(ErrorKind::invalid_argument,
         "no records labeled on " + std::string(to_string(dimension)));
  }
  const Eigen::MatrixXf all = data.matrix(layer, kind);
  out.X = all(out.rows, Eigen::all).cast<double>();
  return out;
}

CvResult cross_validate(const dataset::Dataset& data, Dimension dimension, int layer,
                        ActivationKind kind, const CvOptions& options) {
  const LabeledMatrix m = labeled_matrix(data, dimension, layer, kind);
  return cross_validate(m.X, m.y, options);
}

ProbeReport layer_sweep(int num_layers, const LayerSource& layers, std::span<const Direction> labels,
                        Dimension dimension, ActivationKind kind, const SweepOptions& options) {
  if (num_layers < 1) fail(ErrorKind::invalid_argument, "layer sweep needs at least one layer");
  if (options.fractions.empty()) fail(ErrorKind::invalid_argument, "no training fractions given");

  ProbeReport report;
  report.dimension = dimension;
  report.kind = kind;
  report.baseline_f1 = options.baseline_f1;
  const std::size_t n_frac = options.fractions.size();
  report.rows.resize(n_frac * static_cast<std::size_t>(num_layers));

  // One job per layer; each job runs every fraction so the layer is loaded once.
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int layer = next++; layer < num_layers; layer = next++) {
      try {
        const Eigen::MatrixXd X = layers(layer);
        for (std::size_t fi = 0; fi < n_frac; ++fi) {
          CvOptions cv = options.cv;
          cv.fraction = options.fractions[fi];
          auto& row = report.rows[fi * static_cast<std::size_t>(num_layers) + static_cast<std::size_t>(layer)];
          row.layer = layer;
          row.fraction = cv.fraction;
          row.result = cross_validate(X, labels, cv);
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int jobs = std::clamp(options.jobs, 1, num_layers);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  for (std::size_t fi = 0; fi < n_frac; ++fi) {
    int best = 0;
    double best_f1 = -1.0;
    for (int layer = 0; layer < num_layers; ++layer) {
      const double f1 =
          report.rows[fi * static_cast<std::size_t>(num_layers) + static_cast<std::size_t>(layer)]
              .result.mean_f1;
      if (f1 > best_f1) {
        best_f1 = f1;
        best = layer;
      }
    }
    report.best_layer[options.fractions[fi]] = best;
  }
  return report;
}

ProbeReport layer_sweep(const dataset::Dataset& data, Dimension dimension, ActivationKind kind,
                        const SweepOptions& options) {
  const auto all = data.labels(dimension);
  std::vector<std::size_t> rows;
  std::vector<Direction> labels;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i]) {
      rows.push_back(i);
      labels.push_back(*all[i]);
    }
  }
  if (rows.empty()) {
    fail(ErrorKind::invalid_argument, "no records labeled on " + std::string(to_string(dimension)));
  }
  return layer_sweep(
      data.manifest().num_layers,
      [&](int layer) -> Eigen::MatrixXd {
        return data.matrix(layer, kind)(rows, Eigen::all).cast<double>();
      },
      labels, dimension, kind, options);
}

void write_report_csv(std::ostream& out, const ProbeReport& report) {
  CsvWriter csv(out);
  csv.row({"layer", "fraction", "mean_f1", "ci_f1", "mean_acc", "ci_acc"});
  for (const auto& r : report.rows) {
    csv.row({std::to_string(r.layer), fraction_label(r.fraction), format_double(r.result.mean_f1),
             format_double(r.result.ci95_f1), format_double(r.result.mean_acc),
             format_double(r.result.ci95_acc)});
  }
}

void write_report_long(std::ostream& out, const ProbeReport& report) {
  CsvWriter csv(out);
  csv.row({"series", "layer", "fraction", "metric", "value", "ci", "best"});
  for (const auto& r : report.rows) {
    const bool best = report.best_layer.at(r.fraction) == r.layer;
    csv.row({"probe", std::to_string(r.layer), fraction_label(r.fraction), "f1",
             format_double(r.result.mean_f1), format_double(r.result.ci95_f1), best ? "1" : "0"});
    csv.row({"probe", std::to_string(r.layer), fraction_label(r.fraction), "accuracy",
             format_double(r.result.mean_acc), format_double(r.result.ci95_acc), best ? "1" : "0"});
  }
  if (report.baseline_f1) {
    csv.row({"baseline", "", "", "f1", format_double(*report.baseline_f1), "", "0"});
  }
}

namespace {
constexpr char kProbeMagic[8] = {'I', 'M', 'P', 'R', 'O', 'B', 'E', '\x01'};
}

void save_probe(const std::filesystem::path& path, const ProbeModel& m) {
  nlohmann::ordered_json header;
  header["dimension"] = std::string(to_string(m.dimension));
  header["layer"] = m.layer;
  header["kind"] = std::string(to_string(m.kind));
  header["dim"] = m.weights.size();
  header["bias"] = m.bias;
  header["reg_lambda"] = m.reg_lambda;
  header["train_fraction"] = m.train_fraction;
  header["fold"] = m.fold;
  header["seed"] = m.seed;
  header["iterations"] = m.iterations;
  header["converged"] = m.converged;
  const std::string h = header.dump();

  std::string bytes(kProbeMagic, sizeof kProbeMagic);
  const auto len = static_cast<std::uint32_t>(h.size());
  for (int b = 0; b < 4; ++b) bytes += static_cast<char>((len >> (8 * b)) & 0xFF);
  bytes += h;
  for (Eigen::Index i = 0; i < m.weights.size(); ++i) {
    const auto u = std::bit_cast<std::uint64_t>(m.weights[i]);
    for (int b = 0; b < 8; ++b) bytes += static_cast<char>((u >> (8 * b)) & 0xFF);
  }
  write_file_atomic(path, bytes);
}

ProbeModel load_probe(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kProbeMagic, sizeof kProbeMagic) != 0) {
    fail(ErrorKind::format, "'" + path.string() + "' is not a probe file");
  }
  std::uint32_t len = 0;
  for (int b = 0; b < 4; ++b) {
    len |= std::uint32_t(static_cast<unsigned char>(bytes[8 + b])) << (8 * b);
  }
  if (bytes.size() < 12 + static_cast<std::size_t>(len)) {
    fail(ErrorKind::format, "truncated probe header in '" + path.string() + "'");
  }
  ProbeModel m;
  std::size_t dim = 0;
  try {
    const auto h = nlohmann::json::parse(bytes.substr(12, len));
    m.dimension = parse_dimension(h.at("dimension").get<std::string>());
    m.layer = h.at("layer").get<int>();
    m.kind = parse_kind(h.at("kind").get<std::string>());
    dim = h.at("dim").get<std::size_t>();
    m.bias = h.at("bias").get<double>();
    m.reg_lambda = h.at("reg_lambda").get<double>();
    m.train_fraction = h.at("train_fraction").get<double>();
    m.fold = h.at("fold").get<int>();
    m.seed = h.at("seed").get<std::uint64_t>();
    m.iterations = h.at("iterations").get<int>();
    m.converged = h.at("converged").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, std::string("malformed probe header: ") + e.what());
  }
  const std::size_t offset = 12 + len;
  if (bytes.size() != offset + 8 * dim) {
    fail(ErrorKind::format, "probe weight block has the wrong size in '" + path.string() + "'");
  }
  m.weights.resize(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    std::uint64_t u = 0;
    for (int b = 0; b < 8; ++b) {
      u |= std::uint64_t(static_cast<unsigned char>(bytes[offset + 8 * i + b])) << (8 * b);
    }
    m.weights[static_cast<Eigen::Index>(i)] = std::bit_cast<double>(u);
  }
  return m;
}

}  // namespace improbe::probes
