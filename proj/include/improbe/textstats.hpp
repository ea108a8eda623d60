#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "improbe/types.hpp"

namespace improbe::textstats {

// Term counts of one subset. `total` is the token count n of the subset;
// for token counts it equals the sum of counts, for category counts it is
// the number of tokens scanned.
struct CorpusCounts {
  std::map<std::string, double> counts;
  double total = 0.0;
  std::string label;
};

CorpusCounts count_tokens(const std::vector<std::vector<std::string>>& docs, std::string label = {});
CorpusCounts count_texts(std::span<const std::string> texts, std::string label = {});

struct IdpResult {
  std::string term;
  double z = 0.0;
  double delta = 0.0;  // prior-smoothed log-odds ratio, s1 relative to s2
  double freq = 0.0;   // (y1 + y2) / (n1 + n2)
};

// Background count given to terms the background corpus never saw.
inline constexpr double kUnseenBackgroundCount = 0.01;

// Log-odds ratio with an informative Dirichlet prior. The prior is
// alpha_w = prior_strength * f_w, where f_w is the background frequency over
// the union vocabulary (s1, s2 and background). Results cover the terms of
// s1 and s2, sorted by z descending (ties by term).
std::vector<IdpResult> idp_log_odds(const CorpusCounts& s1, const CorpusCounts& s2,
                                    const CorpusCounts& background, double prior_strength = 500.0);

// term,z,delta,freq
void write_idp_csv(std::ostream& out, const std::vector<IdpResult>& results);

struct Pattern {
  std::vector<std::string> tokens;  // already normalised like the text
  bool prefix = false;              // last token is a prefix ("wonder*")
};

struct CategoryLexicon {
  std::map<std::string, std::vector<Pattern>> categories;
};

// Throws a format error for an empty pattern or a '*' that is not terminal.
Pattern parse_pattern(std::string_view raw);
// Lines of "category<TAB>pattern"; blank lines and '#' comments skipped.
CategoryLexicon parse_category_lexicon(std::string_view content);
CategoryLexicon read_category_lexicon(const std::filesystem::path& path);

// Occurrences per category (every category present, possibly 0). At each
// position the longest matching pattern wins and consumes its tokens.
std::map<std::string, std::size_t> dictionary_count(std::string_view text,
                                                    const CategoryLexicon& lexicon);
std::map<std::string, std::size_t> dictionary_count_tokens(const std::vector<std::string>& tokens,
                                                           const CategoryLexicon& lexicon);
// Sum over all categories.
std::size_t total_matches(std::string_view text, const CategoryLexicon& lexicon);

// Category counts of a subset; total is the number of tokens scanned.
CorpusCounts count_categories(std::span<const std::string> texts, const CategoryLexicon& lexicon,
                              std::string label = {});

enum class ReportedAnswer { positive, negative, unparsed };
ReportedAnswer parse_reported_answer(std::string_view s);

struct ConsistencyReport {
  double accuracy = 0.0;       // share of (high, positive) or (low, negative) pairs
  double positive_rate = 0.0;  // share reported positive
  std::optional<double> mean_prob_gap;  // mean(positive_score - negative_score)
  std::size_t n = 0;
};

// Unparsed answers count as mismatches and as not positive.
ConsistencyReport consistency_report(std::span<const Direction> provided,
                                     std::span<const ReportedAnswer> reported,
                                     std::span<const double> positive_scores = {},
                                     std::span<const double> negative_scores = {});

}  // namespace improbe::textstats
