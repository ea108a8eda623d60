#include "improbe/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "improbe/agreement.hpp"
#include "improbe/bow.hpp"
#include "improbe/corpus.hpp"
#include "improbe/csv.hpp"
#include "improbe/dataset.hpp"
#include "improbe/errors.hpp"
#include "improbe/filters.hpp"
#include "improbe/glm.hpp"
#include "improbe/hashing.hpp"
#include "improbe/lexicon.hpp"
#include "improbe/probes.hpp"
#include "improbe/text.hpp"
#include "improbe/textstats.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace improbe::cli {
namespace {

struct Options {
  std::string lexicon, dataset, out, corpus, background, probe, probes_dir, vectors;
  std::string prompts, labels, acts, ratings, input;
  std::string dimension, kind = "mlp", fractions = "0.25,0.5,1.0";
  std::string scale = "none", level = "ordinal", mode = "chat", field;
  std::string predictors = "warmth,competence,prompt_len,response_len", group_column = "group_tag", groups;
  std::string model_name = "unknown", token_policy = "final_token";
  std::string reg_lambda, baseline_f1;
  int samples = 10, k = 5, jobs = 0, top = 0;
  std::uint64_t seed = 0;
  double prior_strength = 500.0;
  std::size_t max_vocab = 10000;
};

// Collects config, input digests and outputs; writes run.json last.
// The output directory is not part of the config so reruns into different
// directories stay comparable byte for byte.
class Run {
 public:
  Run(std::string subcommand, fs::path out) : subcommand_(std::move(subcommand)), out_(std::move(out)) {
    if (out_.empty()) fail(ErrorKind::invalid_argument, "--out is required");
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory " + out_.string());
  }

  template <class T>
  void set(const std::string& key, const T& value) { config_[key] = value; }

  void input_file(const std::string& path) {
    if (path.empty()) return;
    inputs_[path] = sha256_hex(read_file(path));
  }
  void input_dataset(const dataset::Dataset& d) { inputs_[d.dir().string()] = d.manifest().checksum; }

  std::string config_hash() const { return sha256_hex(config_.dump()).substr(0, 16); }

  // Report header: one "# key=value" line per config entry.
  std::string header() const {
    std::string h = "# improbe " + subcommand_ + " config_hash=" + config_hash() + "\n";
    for (const auto& [key, value] : config_.items()) {
      h += "# " + key + "=" + (value.is_string() ? value.get<std::string>() : value.dump()) + "\n";
    }
    return h;
  }

  const fs::path& out() const { return out_; }

  void write(const std::string& name, const std::string& content) {
    write_file_atomic(out_ / name, content);
    outputs_.insert(name);
  }
  void write_report(const std::string& name, const std::string& body) { write(name, header() + body); }
  void note_output(const std::string& name) { outputs_.insert(name); }

  void finish() {
    json j;
    j["subcommand"] = subcommand_;
    j["config"] = config_;
    j["config_hash"] = config_hash();
    j["inputs"] = inputs_;
    j["outputs"] = std::vector<std::string>(outputs_.begin(), outputs_.end());
    write_file_atomic(out_ / "run.json", j.dump(2) + "\n");
  }

 private:
  std::string subcommand_;
  fs::path out_;
  json config_ = json::object();
  std::map<std::string, std::string> inputs_;
  std::set<std::string> outputs_;
};

std::vector<double> parse_fractions(const std::string& s) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) {
    const double f = parse_double(part);
    if (!(f > 0.0 && f <= 1.0)) fail(ErrorKind::invalid_argument, "fraction " + part + " outside (0,1]");
    out.push_back(f);
  }
  if (out.empty()) fail(ErrorKind::invalid_argument, "--fractions is empty");
  return out;
}

std::vector<std::string> parse_list(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& part : split(s, ',')) {
    const auto t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) fail(ErrorKind::invalid_argument, std::string(flag) + " is required");
}

std::optional<double> optional_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

int resolve_jobs(int flag) {
  int jobs = flag > 0 ? flag : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("IMPROBE_JOBS"); env && *env) {
    const long long cap = parse_int(env);
    if (cap < 1) fail(ErrorKind::invalid_argument, "IMPROBE_JOBS must be a positive integer");
    jobs = std::min<int>(jobs, static_cast<int>(cap));
  }
  return jobs;
}

std::string fmt(double v) { return format_double(v); }

std::vector<float> parse_vector(std::string_view s, const std::string& where) {
  std::vector<float> v;
  for (const auto& tok : split_whitespace(s)) {
    float x = 0.0f;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      fail(ErrorKind::format, "bad number '" + tok + "' in " + where);
    }
    v.push_back(x);
  }
  return v;
}

const std::string& text_field(const dataset::CorpusDocument& d, const std::string& field) {
  if (field.empty() || field == "text") return d.text;
  if (field == "response_text") {
    if (!d.response_text) fail(ErrorKind::format, "document '" + d.doc_id + "' has no response_text");
    return *d.response_text;
  }
  fail(ErrorKind::invalid_argument, "--field must be text or response_text");
}

// Named covariates: prompt_len/response_len are word counts, anything else is
// a corpus column.
double predictor_value(const dataset::CorpusDocument& d, const std::string& name) {
  if (name == "prompt_len") return static_cast<double>(word_count(d.text));
  if (name == "response_len") {
    if (!d.response_text) fail(ErrorKind::format, "document '" + d.doc_id + "' has no response_text");
    return static_cast<double>(word_count(*d.response_text));
  }
  if (name == "dialect_posterior") {
    if (!d.dialect_posterior) fail(ErrorKind::format, "document '" + d.doc_id + "' lacks dialect_posterior");
    return *d.dialect_posterior;
  }
  const auto it = d.extra.find(name);
  if (it == d.extra.end() || trim(it->second).empty()) {
    fail(ErrorKind::format, "document '" + d.doc_id + "' lacks predictor '" + name + "'");
  }
  return parse_double(it->second);
}

Eigen::MatrixXd predictor_matrix(const std::vector<dataset::CorpusDocument>& docs,
                                 const std::vector<std::string>& names) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = predictor_value(docs[i], names[j]);
    }
  }
  return X;
}

// ---- subcommands -----------------------------------------------------------

void cmd_gen_specs(const Options& o) {
  require(o.lexicon, "--lexicon");
  Run run("gen-specs", o.out);
  run.set("lexicon", o.lexicon);
  run.set("samples", o.samples);
  run.input_file(o.lexicon);

  const auto lex = lexicon::read_lexicon(o.lexicon);
  const auto e = lexicon::enumerate_specs(lex.of(Dimension::warmth), lex.of(Dimension::competence),
                                          o.samples);
  std::ostringstream specs, labels, dropped;
  // specs.csv is the interface file read by the extractor, so it carries no header comments.
  lexicon::write_spec_manifest(specs, e.specs);
  lexicon::write_spec_labels(labels, e.specs);
  CsvWriter d(dropped);
  d.row({"term", "dictionary"});
  for (const auto& row : lex.dropped) d.row({row.term, row.dictionary});
  run.write("specs.csv", specs.str());
  run.write("spec_labels.csv", labels.str());
  run.write_report("dropped_terms.csv", dropped.str());
  run.finish();
  std::cout << "specs=" << e.specs.size() << " slots=" << e.slot_count << "\n";
}

void cmd_ingest(const Options& o) {
  require(o.prompts, "--prompts");
  require(o.labels, "--labels");
  require(o.acts, "--acts");
  Run run("ingest", o.out);
  run.set("prompts", o.prompts);
  run.set("labels", o.labels);
  run.set("acts", o.acts);
  run.set("model_name", o.model_name);
  run.set("token_policy", o.token_policy);
  run.set("samples", o.samples);
  run.input_file(o.prompts);
  run.input_file(o.labels);
  run.input_file(o.acts);

  const auto pt = read_csv(o.prompts);
  const auto c_id = pt.require("prompt_id"), c_spec = pt.require("spec_id"),
             c_model = pt.require("model_id"), c_idx = pt.require("sample_index"),
             c_text = pt.require("text");
  std::vector<dataset::PromptRecord> prompts;
  for (const auto& r : pt.rows) {
    prompts.push_back(dataset::PromptRecord::make(r[c_id], r[c_spec], r[c_text], r[c_model],
                                                  static_cast<int>(parse_int(r[c_idx]))));
  }

  const auto lt = read_csv(o.labels);
  const auto l_spec = lt.require("spec_id"), l_w = lt.require("warmth"), l_c = lt.require("competence");
  dataset::LabelTable labels;
  for (const auto& r : lt.rows) {
    labels[r[l_spec]] = {parse_optional_direction(r[l_w]), parse_optional_direction(r[l_c])};
  }

  const auto at = read_csv(o.acts);
  const auto a_id = at.require("prompt_id"), a_layer = at.require("layer"), a_kind = at.require("kind"),
             a_vec = at.require("vector");
  std::vector<dataset::ActivationRecord> acts;
  dataset::DatasetManifest m;
  m.model_name = o.model_name;
  m.token_policy = dataset::parse_token_policy(o.token_policy);
  m.samples_per_spec = o.samples;
  int max_layer = -1;
  for (std::size_t i = 0; i < at.rows.size(); ++i) {
    const auto& r = at.rows[i];
    dataset::ActivationRecord a;
    a.prompt_id = r[a_id];
    a.layer = static_cast<int>(parse_int(r[a_layer]));
    a.kind = parse_kind(r[a_kind]);
    a.vector = parse_vector(r[a_vec], o.acts + " row " + std::to_string(i + 1));
    if (a.layer < 0) fail(ErrorKind::format, "negative layer in " + o.acts);
    max_layer = std::max(max_layer, a.layer);
    m.hidden_dim.emplace(a.kind, static_cast<int>(a.vector.size()));
    acts.push_back(std::move(a));
  }
  if (acts.empty()) fail(ErrorKind::format, o.acts + " holds no activation rows");
  m.num_layers = max_layer + 1;
  m.record_count = prompts.size();

  const fs::path dir = run.out() / "dataset";
  const std::string checksum = dataset::write_dataset(m, prompts, labels, acts, dir);
  run.note_output("dataset");
  const auto opened = dataset::Dataset::open(dir);

  std::ostringstream body;
  CsvWriter csv(body);
  csv.row({"layer", "kind", "rows", "dim"});
  for (int layer = 0; layer < m.num_layers; ++layer) {
    for (const auto& [kind, dim] : m.hidden_dim) {
      csv.row({std::to_string(layer), std::string(to_string(kind)),
               std::to_string(opened.prompts().size()), std::to_string(dim)});
    }
  }
  run.write_report("ingest.csv", "# checksum=" + checksum + "\n" + body.str());
  run.finish();
  std::cout << "records=" << prompts.size() << " checksum=" << checksum << "\n";
}

void cmd_summarize(const Options& o) {
  require(o.dataset, "--dataset");
  Run run("summarize", o.out);
  run.set("dataset", o.dataset);
  run.set("dimension", o.dimension.empty() ? std::string("all") : o.dimension);
  const auto data = dataset::Dataset::open(o.dataset);
  run.input_dataset(data);

  std::vector<Dimension> dims{Dimension::warmth, Dimension::competence};
  if (!o.dimension.empty()) dims = {parse_dimension(o.dimension)};
  std::ostringstream body;
  CsvWriter csv(body);
  csv.row({"dimension", "direction", "count", "mean_len", "sd_len"});
  for (Dimension d : dims) {
    const auto s = dataset::summarize(data, d);
    for (const auto& [dir, st] : {std::pair{Direction::high, s.high}, std::pair{Direction::low, s.low}}) {
      csv.row({std::string(to_string(d)), std::string(to_string(dir)), std::to_string(st.count),
               fmt(st.mean_len), fmt(st.sd_len)});
    }
  }
  run.write_report("summary.csv", body.str());
  run.finish();
}

probes::TrainOptions train_options(const Options& o) {
  probes::TrainOptions t;
  t.reg_lambda = optional_double(o.reg_lambda);
  if (t.reg_lambda && !(*t.reg_lambda >= 0.0)) fail(ErrorKind::invalid_argument, "--reg-lambda must be >= 0");
  return t;
}

void set_train_config(Run& run, const Options& o, const probes::TrainOptions& t) {
  run.set("reg_lambda", o.reg_lambda.empty() ? std::string("1/n") : o.reg_lambda);
  run.set("grad_tol", t.grad_tol);
  run.set("max_iter", t.max_iter);
  run.set("seed", o.seed);
}

std::string probe_file_name(Dimension d, ActivationKind kind, int layer) {
  return std::string(to_string(d)) + "_" + std::string(to_string(kind)) + "_L" + std::to_string(layer) +
         ".probe";
}

void cmd_train_probes(const Options& o) {
  require(o.dataset, "--dataset");
  require(o.dimension, "--dimension");
  Run run("train-probes", o.out);
  const Dimension dim = parse_dimension(o.dimension);
  const ActivationKind kind = parse_kind(o.kind);
  const auto train = train_options(o);
  run.set("dataset", o.dataset);
  run.set("dimension", o.dimension);
  run.set("kind", o.kind);
  run.set("k", o.k);
  run.set("fractions", o.fractions);
  if (!o.baseline_f1.empty()) run.set("baseline_f1", o.baseline_f1);
  set_train_config(run, o, train);

  const auto data = dataset::Dataset::open(o.dataset);
  run.input_dataset(data);
  probes::SweepOptions sweep;
  sweep.fractions = parse_fractions(o.fractions);
  sweep.cv.k = o.k;
  sweep.cv.seed = o.seed;
  sweep.cv.train = train;
  sweep.jobs = resolve_jobs(o.jobs);
  sweep.baseline_f1 = optional_double(o.baseline_f1);
  const auto report = probes::layer_sweep(data, dim, kind, sweep);

  std::ostringstream wide, lng;
  probes::write_report_csv(wide, report);
  probes::write_report_long(lng, report);
  run.write_report("report.csv", wide.str());
  run.write_report("report_long.csv", lng.str());

  // One probe per layer fitted on every labeled record, for eval-probes/predict.
  fs::create_directories(run.out() / "probes");
  for (int layer = 0; layer < data.manifest().num_layers; ++layer) {
    const auto lm = probes::labeled_matrix(data, dim, layer, kind);
    Eigen::VectorXd y(static_cast<Eigen::Index>(lm.y.size()));
    for (std::size_t i = 0; i < lm.y.size(); ++i) y[static_cast<Eigen::Index>(i)] = lm.y[i] == Direction::high;
    auto model = probes::train_logistic(lm.X, y, train, o.seed);
    model.dimension = dim;
    model.layer = layer;
    model.kind = kind;
    model.train_fraction = 1.0;
    model.fold = -1;
    model.seed = o.seed;
    const std::string name = "probes/" + probe_file_name(dim, kind, layer);
    probes::save_probe(run.out() / name, model);
    run.note_output(name);
  }
  run.finish();
  for (const auto& [fraction, layer] : report.best_layer) {
    std::cout << "fraction=" << fmt(fraction) << " best_layer=" << layer << "\n";
  }
}

void cmd_eval_probes(const Options& o) {
  require(o.dataset, "--dataset");
  require(o.probes_dir, "--probes");
  Run run("eval-probes", o.out);
  run.set("dataset", o.dataset);
  run.set("probes", o.probes_dir);
  const auto data = dataset::Dataset::open(o.dataset);
  run.input_dataset(data);

  std::vector<fs::path> files;
  if (!fs::is_directory(o.probes_dir)) fail(ErrorKind::io, "probe directory not found: " + o.probes_dir);
  for (const auto& entry : fs::directory_iterator(o.probes_dir)) {
    if (entry.path().extension() == ".probe") files.push_back(entry.path());
  }
  if (files.empty()) fail(ErrorKind::io, "no .probe files in " + o.probes_dir);
  std::sort(files.begin(), files.end());

  std::ostringstream body;
  CsvWriter csv(body);
  csv.row({"probe", "dimension", "kind", "layer", "n", "f1", "accuracy", "precision", "recall"});
  for (const auto& f : files) {
    run.input_file(f.string());
    const auto model = probes::load_probe(f);
    const auto lm = probes::labeled_matrix(data, model.dimension, model.layer, model.kind);
    const Eigen::VectorXd p = probes::predict_proba_rows(model, lm.X);
    std::vector<Direction> pred;
    for (Eigen::Index i = 0; i < p.size(); ++i) pred.push_back(p[i] >= 0.5 ? Direction::high : Direction::low);
    const auto c = probes::confusion(lm.y, pred);
    csv.row({f.filename().string(), std::string(to_string(model.dimension)),
             std::string(to_string(model.kind)), std::to_string(model.layer), std::to_string(lm.y.size()),
             fmt(c.f1()), fmt(c.accuracy()), fmt(c.precision()), fmt(c.recall())});
  }
  run.write_report("eval.csv", body.str());
  run.finish();
}

void cmd_predict(const Options& o) {
  require(o.probe, "--probe");
  if (o.dataset.empty() == o.vectors.empty()) {
    fail(ErrorKind::invalid_argument, "predict needs exactly one of --dataset or --vectors");
  }
  if (o.scale != "none" && o.scale != "bipolar") {
    fail(ErrorKind::invalid_argument, "--scale must be none or bipolar");
  }
  Run run("predict", o.out);
  run.set("probe", o.probe);
  run.set("scale", o.scale);
  run.input_file(o.probe);
  const auto model = probes::load_probe(o.probe);

  std::vector<std::string> ids;
  Eigen::MatrixXd X;
  if (!o.dataset.empty()) {
    run.set("dataset", o.dataset);
    const auto data = dataset::Dataset::open(o.dataset);
    run.input_dataset(data);
    X = data.matrix(model.layer, model.kind).cast<double>();
    for (const auto& p : data.prompts()) ids.push_back(p.prompt_id);
  } else {
    run.set("vectors", o.vectors);
    run.input_file(o.vectors);
    const auto t = read_csv(o.vectors);
    const auto c_id = t.require("id"), c_vec = t.require("vector");
    X.resize(static_cast<Eigen::Index>(t.rows.size()), model.weights.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto v = parse_vector(t.rows[i][c_vec], o.vectors + " row " + std::to_string(i + 1));
      if (static_cast<Eigen::Index>(v.size()) != model.weights.size()) {
        fail(ErrorKind::format, "vector width " + std::to_string(v.size()) + " does not match probe width " +
                                    std::to_string(model.weights.size()));
      }
      for (std::size_t j = 0; j < v.size(); ++j) {
        X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
      }
      ids.push_back(t.rows[i][c_id]);
    }
  }
  if (X.cols() != model.weights.size()) fail(ErrorKind::format, "probe width does not match the input");

  std::ostringstream body;
  CsvWriter csv(body);
  csv.row({"id", "score", "proba", "output"});
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double s = probes::score(model, X.row(i).transpose());
    const double p = probes::sigmoid(s);
    const double out = o.scale == "bipolar" ? probes::scale_bipolar(p) : p;
    csv.row({ids[static_cast<std::size_t>(i)], fmt(s), fmt(p), fmt(out)});
  }
  run.write_report("predictions.csv", body.str());
  run.finish();
}

void cmd_bow_baseline(const Options& o) {
  require(o.dataset, "--dataset");
  require(o.dimension, "--dimension");
  Run run("bow-baseline", o.out);
  const Dimension dim = parse_dimension(o.dimension);
  const auto train = train_options(o);
  run.set("dataset", o.dataset);
  run.set("dimension", o.dimension);
  run.set("k", o.k);
  run.set("fractions", o.fractions);
  run.set("max_vocab", o.max_vocab);
  set_train_config(run, o, train);
  const auto data = dataset::Dataset::open(o.dataset);
  run.input_dataset(data);

  const auto all = data.labels(dim);
  std::vector<std::string> texts;
  std::vector<Direction> labels;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i]) {
      texts.push_back(data.prompts()[i].text);
      labels.push_back(*all[i]);
    }
  }
  std::ostringstream body;
  CsvWriter csv(body);
  csv.row({"fraction", "mean_f1", "ci_f1", "mean_acc", "ci_acc", "vocab_size"});
  bow::Vocab vocab;
  for (double fraction : parse_fractions(o.fractions)) {
    probes::CvOptions cv;
    cv.k = o.k;
    cv.fraction = fraction;
    cv.seed = o.seed;
    cv.train = train;
    const auto b = bow::bow_cross_validate(texts, labels, cv, o.max_vocab);
    csv.row({fmt(fraction), fmt(b.result.mean_f1), fmt(b.result.ci95_f1), fmt(b.result.mean_acc),
             fmt(b.result.ci95_acc), std::to_string(b.vocab.size())});
    vocab = b.vocab;
  }
  run.write_report("bow.csv", body.str());
  bow::write_vocab(run.out() / "vocab.txt", vocab);
  run.note_output("vocab.txt");
  run.finish();
}

void cmd_analyze_quality(const Options& o) {
  require(o.corpus, "--corpus");
  Run run("analyze-quality", o.out);
  const auto names = parse_list(o.predictors);
  if (names.empty()) fail(ErrorKind::invalid_argument, "--predictors is empty");
  glm::FitOptions fo;
  run.set("corpus", o.corpus);
  run.set("predictors", o.predictors);
  run.set("ll_tol", fo.ll_tol);
  run.set("max_iter", fo.max_iter);
  run.input_file(o.corpus);

  const auto docs = dataset::read_corpus(o.corpus);
  std::vector<dataset::CorpusDocument> rated;
  std::vector<int> y;
  for (const auto& d : docs) {
    if (d.quality_score) {
      rated.push_back(d);
      y.push_back(*d.quality_score);
    }
  }
  if (rated.empty()) fail(ErrorKind::format, "no document carries a quality_score");
  const auto fit = glm::fit_ordered_logistic(predictor_matrix(rated, names), y, names, fo);
  std::ostringstream body;
  glm::write_fit_report(body, fit);
  run.write_report("quality_fit.csv", body.str());
  run.finish();
}

void cmd_analyze_hedging(const Options& o) {
  require(o.corpus, "--corpus");
  require(o.lexicon, "--lexicon");
  Run run("analyze-hedging", o.out);
  const auto names = parse_list(o.predictors);
  if (names.empty()) fail(ErrorKind::invalid_argument, "--predictors is empty");
  const std::string field = o.field.empty() ? "response_text" : o.field;
  glm::NbOptions nbo;
  run.set("corpus", o.corpus);
  run.set("lexicon", o.lexicon);
  run.set("predictors", o.predictors);
  run.set("field", field);
  run.set("ll_tol", nbo.ll_tol);
  run.set("max_iter", nbo.max_iter);
  run.input_file(o.corpus);
  run.input_file(o.lexicon);

  const auto docs = dataset::read_corpus(o.corpus);
  const auto lex = textstats::read_category_lexicon(o.lexicon);
  if (docs.empty()) fail(ErrorKind::format, "corpus is empty");

  std::ostringstream counts;
  CsvWriter csv(counts);
  std::vector<std::string> header{"doc_id"};
  for (const auto& [cat, patterns] : lex.categories) header.push_back(cat);
  header.push_back("total");
  csv.row(header);
  std::vector<int> y;
  for (const auto& d : docs) {
    const auto c = textstats::dictionary_count(text_field(d, field), lex);
    std::vector<std::string> row{d.doc_id};
    std::size_t total = 0;
    for (const auto& [cat, patterns] : lex.categories) {
      const auto it = c.find(cat);
      const std::size_t n = it == c.end() ? 0 : it->second;
      total += n;
      row.push_back(std::to_string(n));
    }
    row.push_back(std::to_string(total));
    csv.row(row);
    y.push_back(static_cast<int>(total));
  }
  const auto fit = glm::fit_negative_binomial(predictor_matrix(docs, names), y, names, nbo);
  std::ostringstream body;
  glm::write_fit_report(body, fit);
  run.write_report("hedge_counts.csv", counts.str());
  run.write_report("hedging_fit.csv", body.str());
  run.finish();
}

std::string group_of(const dataset::CorpusDocument& d, const std::string& column) {
  if (column == "group_tag") return d.group_tag.value_or("");
  const auto it = d.extra.find(column);
  return it == d.extra.end() ? std::string() : it->second;
}

void cmd_idp(const Options& o) {
  require(o.corpus, "--corpus");
  require(o.groups, "--groups");
  const auto groups = parse_list(o.groups);
  if (groups.size() != 2 || groups[0] == groups[1]) {
    fail(ErrorKind::invalid_argument, "--groups needs two distinct group names, e.g. A,B");
  }
  if (!(o.prior_strength > 0.0)) fail(ErrorKind::invalid_argument, "--prior-strength must be > 0");
  Run run("idp", o.out);
  const std::string field = o.field.empty() ? "text" : o.field;
  run.set("corpus", o.corpus);
  run.set("groups", o.groups);
  run.set("group_column", o.group_column);
  run.set("field", field);
  run.set("prior_strength", o.prior_strength);
  run.set("top", o.top);
  run.set("background", o.background.empty() ? std::string("pooled") : o.background);
  if (!o.lexicon.empty()) run.set("lexicon", o.lexicon);
  run.input_file(o.corpus);
  run.input_file(o.background);
  run.input_file(o.lexicon);

  const auto docs = dataset::read_corpus(o.corpus);
  std::vector<std::string> t1, t2, all;
  for (const auto& d : docs) {
    const std::string g = group_of(d, o.group_column);
    const std::string& t = text_field(d, field);
    if (g == groups[0]) t1.push_back(t);
    if (g == groups[1]) t2.push_back(t);
    all.push_back(t);
  }
  if (t1.empty() || t2.empty()) fail(ErrorKind::format, "a requested group has no documents");
  std::vector<std::string> bg = all;
  if (!o.background.empty()) {
    bg.clear();
    for (const auto& d : dataset::read_corpus(o.background)) bg.push_back(text_field(d, field));
  }

  textstats::CorpusCounts c1, c2, cb;
  if (o.lexicon.empty()) {
    c1 = textstats::count_texts(t1, groups[0]);
    c2 = textstats::count_texts(t2, groups[1]);
    cb = textstats::count_texts(bg, "background");
  } else {
    const auto lex = textstats::read_category_lexicon(o.lexicon);
    c1 = textstats::count_categories(t1, lex, groups[0]);
    c2 = textstats::count_categories(t2, lex, groups[1]);
    cb = textstats::count_categories(bg, lex, "background");
  }
  auto results = textstats::idp_log_odds(c1, c2, cb, o.prior_strength);
  if (o.top > 0 && results.size() > 2 * static_cast<std::size_t>(o.top)) {
    // Keep the strongest terms on both sides.
    std::vector<textstats::IdpResult> trimmed(results.begin(), results.begin() + o.top);
    trimmed.insert(trimmed.end(), results.end() - o.top, results.end());
    results = std::move(trimmed);
  }
  std::ostringstream body;
  textstats::write_idp_csv(body, results);
  run.write_report("idp.csv", body.str());
  run.finish();
}

void cmd_agreement(const Options& o) {
  require(o.ratings, "--ratings");
  Run run("agreement", o.out);
  const auto level = textstats::parse_alpha_level(o.level);
  run.set("ratings", o.ratings);
  run.set("level", o.level);
  run.input_file(o.ratings);

  const auto t = read_csv(o.ratings);
  if (t.header.size() < 3) fail(ErrorKind::format, "ratings need an item column and at least two raters");
  textstats::RatingTable table;
  for (const auto& row : t.rows) {
    std::vector<std::optional<double>> unit;
    for (std::size_t j = 1; j < row.size(); ++j) {
      if (trim(row[j]).empty()) {
        unit.push_back(std::nullopt);
      } else {
        unit.push_back(parse_double(row[j]));
      }
    }
    table.push_back(std::move(unit));
  }
  const auto rep = textstats::agreement_report(table, level);
  std::ostringstream body;
  CsvWriter csv(body);
  csv.row({"metric", "value"});
  csv.row({"n_items", std::to_string(rep.n_items)});
  csv.row({"cohen_kappa_binarized", fmt(rep.cohen_kappa)});
  csv.row({"krippendorff_alpha", fmt(rep.krippendorff_alpha)});
  csv.row({"krippendorff_alpha_binarized", fmt(rep.krippendorff_alpha_binarized)});
  csv.row({"spearman_raw", fmt(rep.spearman_raw)});
  csv.row({"spearman_binarized", fmt(rep.spearman_binarized)});
  run.write_report("agreement.csv", body.str());
  run.finish();
}

void cmd_consistency(const Options& o) {
  require(o.input, "--input");
  Run run("consistency", o.out);
  run.set("input", o.input);
  run.input_file(o.input);

  const auto t = read_csv(o.input);
  const auto c_prov = t.require("provided"), c_rep = t.require("reported");
  const auto c_pos = t.find("positive_score"), c_neg = t.find("negative_score");
  if (c_pos.has_value() != c_neg.has_value()) {
    fail(ErrorKind::format, "positive_score and negative_score must appear together");
  }
  std::vector<std::size_t> group_cols;
  for (const char* g : {"dimension", "setting"}) {
    if (const auto c = t.find(g)) group_cols.push_back(*c);
  }
  struct Bucket {
    std::vector<Direction> provided;
    std::vector<textstats::ReportedAnswer> reported;
    std::vector<double> pos, neg;
  };
  std::map<std::string, Bucket> buckets;
  for (const auto& row : t.rows) {
    std::vector<std::string> key_parts;
    for (auto c : group_cols) key_parts.push_back(row[c]);
    std::vector<std::string> keys{"all"};
    if (!group_cols.empty()) keys.push_back(join(key_parts, "/"));
    for (const auto& key : keys) {
      auto& b = buckets[key];
      b.provided.push_back(parse_direction(row[c_prov]));
      b.reported.push_back(textstats::parse_reported_answer(row[c_rep]));
      if (c_pos) {
        b.pos.push_back(parse_double(row[*c_pos]));
        b.neg.push_back(parse_double(row[*c_neg]));
      }
    }
  }
  if (buckets.empty()) fail(ErrorKind::format, o.input + " has no rows");
  std::ostringstream body;
  CsvWriter csv(body);
  csv.row({"group", "n", "accuracy", "positive_rate", "mean_prob_gap"});
  for (const auto& [key, b] : buckets) {
    const auto r = textstats::consistency_report(b.provided, b.reported, b.pos, b.neg);
    csv.row({key, std::to_string(r.n), fmt(r.accuracy), fmt(r.positive_rate),
             r.mean_prob_gap ? fmt(*r.mean_prob_gap) : std::string()});
  }
  run.write_report("consistency.csv", body.str());
  run.finish();
}

void cmd_filter_corpus(const Options& o) {
  require(o.corpus, "--corpus");
  if (o.mode != "chat" && o.mode != "tweet") fail(ErrorKind::invalid_argument, "--mode must be chat or tweet");
  Run run("filter-corpus", o.out);
  const std::string field = o.field.empty() ? "text" : o.field;
  run.set("corpus", o.corpus);
  run.set("mode", o.mode);
  run.set("field", field);
  run.input_file(o.corpus);

  const auto docs = dataset::read_corpus(o.corpus);
  std::vector<dataset::CorpusDocument> kept;
  std::map<std::string, std::size_t> tally;
  std::ostringstream rej;
  CsvWriter rcsv(rej);
  rcsv.row({"doc_id", "reason"});
  for (const auto& d : docs) {
    const auto& text = text_field(d, field);
    const auto decision = o.mode == "chat" ? dataset::filter_chat_prompt(text) : dataset::filter_tweet(text);
    if (decision.keep()) {
      kept.push_back(d);
      ++tally["keep"];
    } else {
      const std::string r(dataset::to_string(*decision.reason));
      rcsv.row({d.doc_id, r});
      ++tally[r];
    }
  }
  std::ostringstream k, summary;
  dataset::write_corpus_jsonl(k, kept);
  CsvWriter scsv(summary);
  scsv.row({"outcome", "count"});
  scsv.row({"keep", std::to_string(tally["keep"])});
  for (int r = 0; r <= static_cast<int>(dataset::RejectReason::markup_symbol); ++r) {
    const std::string name(dataset::to_string(static_cast<dataset::RejectReason>(r)));
    scsv.row({name, std::to_string(tally[name])});
  }
  run.write("kept.jsonl", k.str());
  run.write_report("rejections.csv", rej.str());
  run.write_report("filter_summary.csv", summary.str());
  run.finish();
}

int exit_code_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return kInvalidArgument;
    case ErrorKind::io: return kIo;
    case ErrorKind::format: return kFormat;
    case ErrorKind::numeric: return kNumeric;
  }
  return kInvalidArgument;
}

void print_error(const char* kind, std::string message) {
  std::replace(message.begin(), message.end(), '\n', ' ');
  std::cerr << "improbe: error[" << kind << "]: " << message << "\n";
}

}  // namespace

int run_command(int argc, char** argv) {
  Options o;
  CLI::App app{"improbe: trait-conditioned activation datasets, linear probes and text statistics"};
  app.require_subcommand(1);

  auto out = [&](CLI::App* s) { s->add_option("--out", o.out, "output directory")->required(); };
  auto dataset_opt = [&](CLI::App* s, bool required) {
    auto* opt = s->add_option("--dataset", o.dataset, "dataset directory");
    if (required) opt->required();
  };
  auto cv_opts = [&](CLI::App* s) {
    s->add_option("--dimension", o.dimension, "warmth or competence")->required();
    s->add_option("--k", o.k, "number of folds")->capture_default_str();
    s->add_option("--fractions", o.fractions, "comma-separated training fractions")->capture_default_str();
    s->add_option("--seed", o.seed)->capture_default_str();
    s->add_option("--reg-lambda", o.reg_lambda, "L2 strength (default 1/n)");
  };

  std::map<CLI::App*, void (*)(const Options&)> handlers;
  auto sub = [&](const char* name, const char* help, void (*fn)(const Options&)) {
    CLI::App* s = app.add_subcommand(name, help);
    handlers[s] = fn;
    out(s);
    return s;
  };

  auto* gen = sub("gen-specs", "enumerate impression specifications from a trait lexicon", cmd_gen_specs);
  gen->add_option("--lexicon", o.lexicon, "trait lexicon CSV")->required();
  gen->add_option("--samples", o.samples, "samples per specification")->capture_default_str();

  auto* ing = sub("ingest", "build a verified dataset directory from CSV inputs", cmd_ingest);
  ing->add_option("--prompts", o.prompts)->required();
  ing->add_option("--labels", o.labels, "spec_id,warmth,competence")->required();
  ing->add_option("--acts", o.acts, "prompt_id,layer,kind,vector")->required();
  ing->add_option("--model-name", o.model_name)->capture_default_str();
  ing->add_option("--token-policy", o.token_policy)->capture_default_str();
  ing->add_option("--samples", o.samples)->capture_default_str();

  auto* sum = sub("summarize", "per-direction prompt counts and lengths", cmd_summarize);
  dataset_opt(sum, true);
  sum->add_option("--dimension", o.dimension);

  auto* tp = sub("train-probes", "cross-validated layer sweep and per-layer probes", cmd_train_probes);
  dataset_opt(tp, true);
  cv_opts(tp);
  tp->add_option("--kind", o.kind)->capture_default_str();
  tp->add_option("--jobs", o.jobs, "worker threads (capped by IMPROBE_JOBS)");
  tp->add_option("--baseline-f1", o.baseline_f1);

  auto* ev = sub("eval-probes", "score saved probes on a dataset", cmd_eval_probes);
  dataset_opt(ev, true);
  ev->add_option("--probes", o.probes_dir, "directory of .probe files")->required();

  auto* pr = sub("predict", "apply a probe to dataset records or raw vectors", cmd_predict);
  pr->add_option("--probe", o.probe)->required();
  dataset_opt(pr, false);
  pr->add_option("--vectors", o.vectors, "CSV with id,vector columns");
  pr->add_option("--scale", o.scale, "none or bipolar")->capture_default_str();

  auto* bw = sub("bow-baseline", "bag-of-words logistic baseline", cmd_bow_baseline);
  dataset_opt(bw, true);
  cv_opts(bw);
  bw->add_option("--max-vocab", o.max_vocab)->capture_default_str();

  auto* aq = sub("analyze-quality", "ordered logistic regression of quality scores", cmd_analyze_quality);
  aq->add_option("--corpus", o.corpus)->required();
  aq->add_option("--predictors", o.predictors)->capture_default_str();

  auto* ah = sub("analyze-hedging", "negative binomial regression of hedge counts", cmd_analyze_hedging);
  ah->add_option("--corpus", o.corpus)->required();
  ah->add_option("--lexicon", o.lexicon, "category\\tpattern file")->required();
  ah->add_option("--predictors", o.predictors)->capture_default_str();
  ah->add_option("--field", o.field, "text or response_text");

  auto* id = sub("idp", "log-odds with informative Dirichlet prior between two groups", cmd_idp);
  id->add_option("--corpus", o.corpus)->required();
  id->add_option("--groups", o.groups, "two group values, e.g. AAL,WME")->required();
  id->add_option("--group-column", o.group_column)->capture_default_str();
  id->add_option("--background", o.background, "background corpus (default: the pooled corpus)");
  id->add_option("--prior-strength", o.prior_strength)->capture_default_str();
  id->add_option("--lexicon", o.lexicon, "count categories instead of tokens");
  id->add_option("--field", o.field);
  id->add_option("--top", o.top, "keep the top N terms per side");

  auto* ag = sub("agreement", "rater agreement on 1-4 ratings", cmd_agreement);
  ag->add_option("--ratings", o.ratings, "item column then one column per rater")->required();
  ag->add_option("--level", o.level, "nominal, ordinal or interval")->capture_default_str();

  auto* cs = sub("consistency", "self-consistency of reported impressions", cmd_consistency);
  cs->add_option("--input", o.input)->required();

  auto* fc = sub("filter-corpus", "apply chat or tweet filtering rules", cmd_filter_corpus);
  fc->add_option("--corpus", o.corpus)->required();
  fc->add_option("--mode", o.mode)->capture_default_str();
  fc->add_option("--field", o.field);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::cout << app.help();
      return kOk;
    }
    print_error("usage", e.what());
    return kUsage;
  }

  try {
    for (auto* s : app.get_subcommands()) handlers.at(s)(o);
    return kOk;
  } catch (const Error& e) {
    print_error(error_kind_name(e.kind()), e.what());
    return exit_code_of(e.kind());
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kInvalidArgument;
  }
}

}  // namespace improbe::cli
