#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "improbe/cli.hpp"

namespace improbe::testing {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("improbe_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "improbe");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  return cli::run_command(static_cast<int>(args.size()), argv.data());
}

SyntheticData make_synthetic(const SyntheticSpec& spec) {
  SyntheticData out;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  out.manifest.model_name = "synthetic";
  out.manifest.num_layers = spec.num_layers;
  for (auto k : spec.kinds) out.manifest.hidden_dim[k] = spec.dim;
  out.manifest.samples_per_spec = 10;

  const char* words[] = {"please", "help", "me", "with", "my", "garden", "plan", "today", "thanks"};
  for (int i = 0; i < spec.n; ++i) {
    const bool warm = i < spec.n / 2;
    const std::string spec_id = "s" + std::to_string(i / 10) + (warm ? "w" : "c");
    std::string text;
    const int len = 3 + i % 6;
    for (int w = 0; w < len; ++w) text += std::string(w ? " " : "") + words[(i + w) % 9];
    out.prompts.push_back(dataset::PromptRecord::make("p" + std::to_string(i), spec_id, text,
                                                      "synthetic", i % 10));
    out.labels[spec_id] = {warm ? Direction::high : Direction::low,
                           (i / 10) % 2 == 0 ? Direction::high : Direction::low};
  }
  for (int layer = 0; layer < spec.num_layers; ++layer) {
    for (auto kind : spec.kinds) {
      for (int i = 0; i < spec.n; ++i) {
        dataset::ActivationRecord r{out.prompts[static_cast<std::size_t>(i)].prompt_id, layer, kind, {}};
        for (int j = 0; j < spec.dim; ++j) r.vector.push_back(static_cast<float>(noise(rng)));
        if (layer == spec.informative_layer) {
          r.vector[0] += static_cast<float>(i < spec.n / 2 ? spec.separation : -spec.separation);
        }
        out.activations.push_back(std::move(r));
      }
    }
  }
  return out;
}

std::string write_synthetic(const fs::path& dir, const SyntheticSpec& spec) {
  const auto d = make_synthetic(spec);
  return dataset::write_dataset(d.manifest, d.prompts, d.labels, d.activations, dir);
}

void write_cli_fixtures(const fs::path& dir, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  write_text(dir / "lexicon.csv",
             "term,dictionary,direction\nFriendly,sociability,high\nMeticulous,agency,high\n"
             "Devout,religion,high\n");
  write_text(dir / "hedges.tsv", "hedge\tmay\nhedge\tperhaps\nhedge\tseem*\nweasel\tsome people\n"
                                 "peacock\tbest\n");

  const char* fillers[] = {"please", "explain", "how", "the", "garden", "grows", "in", "spring", "weather"};
  const char* hedges[] = {"may", "perhaps", "seems", "some people", "best"};
  std::string corpus = "doc_id,text,response_text,quality_score,group_tag,warmth,competence\n";
  for (int i = 0; i < 160; ++i) {
    const double w = u(rng), c = u(rng);
    std::string text;
    const int len = 10 + static_cast<int>(rng() % 8);
    for (int k = 0; k < len; ++k) text += std::string(k ? " " : "") + fillers[(i + k) % 9];
    if (i % 37 == 0) text += " foo(bar)";
    if (i % 41 == 0) text = "too short";
    std::string resp = "sure here is an answer";
    std::poisson_distribution<int> pois(std::exp(0.2 + 1.0 * (1.0 - c)));
    const int nh = pois(rng);
    for (int h = 0; h < nh; ++h) resp += std::string(" ") + hedges[rng() % 5];
    const double p = std::clamp(u(rng), 1e-9, 1.0 - 1e-9);
    const double latent = 2.0 * w + 1.0 * c + std::log(p / (1.0 - p));
    int q = 1;
    for (double cut : {-1.0, 0.0, 1.0, 2.0, 3.0}) q += latent > cut;
    const std::string group = i % 2 ? "A" : "B";
    corpus += "d" + std::to_string(i) + "," + text + " " + (i % 2 ? "yall finna" : "you all going") + "," +
              resp + "," + std::to_string(q) + "," + group + "," + std::to_string(w) + "," +
              std::to_string(c) + "\n";
  }
  write_text(dir / "corpus.csv", corpus);

  std::string ratings = "item,r1,r2,r3\n";
  for (int i = 0; i < 30; ++i) {
    const int base = 1 + static_cast<int>(rng() % 4);
    ratings += "i" + std::to_string(i);
    for (int r = 0; r < 3; ++r) {
      const int v = rng() % 4 == 0 ? 1 + static_cast<int>(rng() % 4) : base;
      ratings += "," + (r == 2 && i % 7 == 0 ? std::string() : std::to_string(v));
    }
    ratings += "\n";
  }
  write_text(dir / "ratings.csv", ratings);

  std::string cons = "dimension,setting,provided,reported,positive_score,negative_score\n";
  for (int i = 0; i < 40; ++i) {
    const bool high = i % 2 == 0;
    const bool agree = rng() % 5 != 0;
    const char* rep = (high == agree) ? "positive" : "negative";
    cons += std::string(i % 4 < 2 ? "warmth" : "competence") + "," + (i % 3 ? "1P" : "3P") + "," +
            (high ? "high" : "low") + "," + (i % 13 == 0 ? "unparsed" : rep) + "," +
            std::to_string(u(rng)) + "," + std::to_string(u(rng)) + "\n";
  }
  write_text(dir / "consistency.csv", cons);

  // 30 prompts over two specs, two layers of mlp activations (dim 3).
  std::string prompts = "prompt_id,spec_id,model_id,sample_index,text\n";
  std::string acts = "prompt_id,layer,kind,vector\n";
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    const bool warm = i % 2 == 0;
    prompts += "p" + std::to_string(i) + "," + (warm ? "sw" : "sc") + ",toy," + std::to_string(i % 10) +
               ",\"" + (warm ? "hello friend, thanks" : "fix this now") + " msg " + std::to_string(i) + "\"\n";
    for (int layer = 0; layer < 2; ++layer) {
      acts += "p" + std::to_string(i) + "," + std::to_string(layer) + ",mlp,";
      for (int j = 0; j < 3; ++j) {
        const double v = g(rng) + (layer == 1 && j == 0 ? (warm ? 3.0 : -3.0) : 0.0);
        acts += (j ? " " : "") + std::to_string(static_cast<float>(v));
      }
      acts += "\n";
    }
  }
  write_text(dir / "prompts.csv", prompts);
  write_text(dir / "labels.csv", "spec_id,warmth,competence\nsw,high,low\nsc,low,high\n");
  write_text(dir / "acts.csv", acts);
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double sd) {
  std::normal_distribution<double> g(0.0, sd);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  }
  return m;
}

}  // namespace improbe::testing
