#include "improbe/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "improbe/errors.hpp"
#include "improbe/glm.hpp"
#include "improbe/text.hpp"

namespace improbe::textstats {
namespace {

template <class T>
double kappa_impl(std::span<const T> r1, std::span<const T> r2) {
  if (r1.size() != r2.size()) fail(ErrorKind::invalid_argument, "rater lists differ in length");
  if (r1.empty()) fail(ErrorKind::invalid_argument, "kappa needs at least one item");
  std::map<T, double> m1, m2;
  double agree = 0.0;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    m1[r1[i]] += 1.0;
    m2[r2[i]] += 1.0;
    agree += r1[i] == r2[i];
  }
  const double n = static_cast<double>(r1.size());
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [c, count] : m1) {
    const auto it = m2.find(c);
    if (it != m2.end()) pe += (count / n) * (it->second / n);
  }
  if (pe >= 1.0) fail(ErrorKind::numeric, "kappa undefined: expected agreement is 1");
  return (po - pe) / (1.0 - pe);
}

}  // namespace

double cohen_kappa(std::span<const std::string> r1, std::span<const std::string> r2) {
  return kappa_impl(r1, r2);
}

double cohen_kappa(std::span<const int> r1, std::span<const int> r2) { return kappa_impl(r1, r2); }

AlphaLevel parse_alpha_level(std::string_view s) {
  const std::string v = ascii_lower(trim(s));
  if (v == "nominal") return AlphaLevel::nominal;
  if (v == "ordinal") return AlphaLevel::ordinal;
  if (v == "interval") return AlphaLevel::interval;
  fail(ErrorKind::invalid_argument, "unknown alpha level '" + std::string(s) + "'");
}

double krippendorff_alpha(const RatingTable& ratings, AlphaLevel level) {
  // Distinct values, ascending; coincidences indexed by value rank.
  std::map<double, std::size_t> index;
  std::size_t pairable_units = 0;
  for (const auto& unit : ratings) {
    const auto m = std::count_if(unit.begin(), unit.end(), [](const auto& v) { return v.has_value(); });
    if (m < 2) continue;
    ++pairable_units;
    for (const auto& v : unit) {
      if (v) index.emplace(*v, 0);
    }
  }
  if (pairable_units < 2) {
    fail(ErrorKind::invalid_argument, "alpha needs at least two items with two ratings");
  }
  std::vector<double> values;
  for (auto& [v, i] : index) {
    i = values.size();
    values.push_back(v);
  }
  const std::size_t V = values.size();
  std::vector<std::vector<double>> o(V, std::vector<double>(V, 0.0));
  for (const auto& unit : ratings) {
    const auto m = std::count_if(unit.begin(), unit.end(), [](const auto& v) { return v.has_value(); });
    if (m < 2) continue;
    std::vector<std::size_t> present;
    for (const auto& v : unit) {
      if (v) present.push_back(index.at(*v));
    }
    const double w = 1.0 / static_cast<double>(present.size() - 1);
    for (std::size_t a = 0; a < present.size(); ++a) {
      for (std::size_t b = 0; b < present.size(); ++b) {
        if (a != b) o[present[a]][present[b]] += w;
      }
    }
  }
  std::vector<double> nc(V, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < V; ++c) {
    for (std::size_t k = 0; k < V; ++k) nc[c] += o[c][k];
    n += nc[c];
  }

  auto delta = [&](std::size_t c, std::size_t k) -> double {
    if (c == k) return 0.0;
    switch (level) {
      case AlphaLevel::nominal: return 1.0;
      case AlphaLevel::interval: return (values[c] - values[k]) * (values[c] - values[k]);
      case AlphaLevel::ordinal: {
        const auto [lo, hi] = std::minmax(c, k);
        double s = 0.0;
        for (std::size_t g = lo; g <= hi; ++g) s += nc[g];
        s -= 0.5 * (nc[lo] + nc[hi]);
        return s * s;
      }
    }
    return 1.0;
  };

  double d_obs = 0.0, d_exp = 0.0;
  for (std::size_t c = 0; c < V; ++c) {
    for (std::size_t k = 0; k < V; ++k) {
      const double dk = delta(c, k);
      d_obs += o[c][k] * dk;
      d_exp += nc[c] * nc[k] * dk;
    }
  }
  d_obs /= n;
  d_exp /= n * (n - 1.0);
  if (d_obs == 0.0) return 1.0;
  return 1.0 - d_obs / d_exp;
}

std::vector<Choice> binarize_ratings(std::span<const int> ratings) {
  std::vector<Choice> out;
  out.reserve(ratings.size());
  for (int r : ratings) {
    if (r < 1 || r > 4) fail(ErrorKind::invalid_argument, "rating " + std::to_string(r) + " outside 1..4");
    out.push_back(r <= 2 ? Choice::first : Choice::second);
  }
  return out;
}

AgreementReport agreement_report(const RatingTable& ratings, AlphaLevel level) {
  AgreementReport rep;
  rep.n_items = ratings.size();
  std::size_t raters = 0;
  for (const auto& u : ratings) raters = std::max(raters, u.size());
  if (raters < 2) fail(ErrorKind::invalid_argument, "agreement needs at least two raters");

  RatingTable binary = ratings;
  for (auto& unit : binary) {
    for (auto& v : unit) {
      if (!v) continue;
      const double r = *v;
      if (r != std::floor(r)) fail(ErrorKind::invalid_argument, "ratings must be integers 1..4");
      *v = binarize_ratings(std::vector<int>{static_cast<int>(r)})[0] == Choice::first ? 0.0 : 1.0;
    }
  }
  rep.krippendorff_alpha = krippendorff_alpha(ratings, level);
  rep.krippendorff_alpha_binarized = krippendorff_alpha(binary, AlphaLevel::nominal);

  double kappa_sum = 0.0, sp_raw = 0.0, sp_bin = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < raters; ++a) {
    for (std::size_t b = a + 1; b < raters; ++b) {
      std::vector<double> xa, xb;
      std::vector<int> ba, bb;
      for (std::size_t u = 0; u < ratings.size(); ++u) {
        const auto& unit = ratings[u];
        if (a < unit.size() && b < unit.size() && unit[a] && unit[b]) {
          xa.push_back(*unit[a]);
          xb.push_back(*unit[b]);
          ba.push_back(static_cast<int>(*binary[u][a]));
          bb.push_back(static_cast<int>(*binary[u][b]));
        }
      }
      if (xa.empty()) continue;
      kappa_sum += cohen_kappa(std::span<const int>(ba), std::span<const int>(bb));
      std::vector<double> fa(ba.begin(), ba.end()), fb(bb.begin(), bb.end());
      sp_raw += glm::correlations(xa, xb).spearman_r;
      sp_bin += glm::correlations(fa, fb).spearman_r;
      ++pairs;
    }
  }
  if (pairs == 0) fail(ErrorKind::invalid_argument, "no rater pair shares an item");
  rep.cohen_kappa = kappa_sum / static_cast<double>(pairs);
  rep.spearman_raw = sp_raw / static_cast<double>(pairs);
  rep.spearman_binarized = sp_bin / static_cast<double>(pairs);
  return rep;
}

}  // namespace improbe::textstats
