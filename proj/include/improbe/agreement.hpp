#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace improbe::textstats {

// (p_o - p_e) / (1 - p_e) with p_e from the product of the two marginals.
// Throws when p_e = 1 (both raters use one and the same category throughout).
double cohen_kappa(std::span<const std::string> r1, std::span<const std::string> r2);
double cohen_kappa(std::span<const int> r1, std::span<const int> r2);

enum class AlphaLevel { nominal, ordinal, interval };
AlphaLevel parse_alpha_level(std::string_view s);

// items x raters; nullopt marks a missing rating.
using RatingTable = std::vector<std::vector<std::optional<double>>>;

// 1 - D_o / D_e from the coincidence matrix of pairable values. Perfect
// observed agreement returns 1. Needs at least two items with two ratings.
double krippendorff_alpha(const RatingTable& ratings, AlphaLevel level);

enum class Choice { first, second };
// 1,2 -> first; 3,4 -> second.
std::vector<Choice> binarize_ratings(std::span<const int> ratings);

struct AgreementReport {
  double cohen_kappa = 0.0;                 // mean over rater pairs, binarized ratings
  double krippendorff_alpha = 0.0;          // raw ratings at the requested level
  double krippendorff_alpha_binarized = 0.0;
  double spearman_raw = 0.0;                // mean pairwise Spearman on raw ratings
  double spearman_binarized = 0.0;
  std::size_t n_items = 0;
};

// Ratings on the 1..4 scale; pairwise statistics use items both raters rated.
AgreementReport agreement_report(const RatingTable& ratings, AlphaLevel level);

}  // namespace improbe::textstats
