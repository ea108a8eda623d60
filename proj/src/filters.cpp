#include "improbe/filters.hpp"

#include <algorithm>
#include <regex>

#include "improbe/text.hpp"

namespace improbe::dataset {
namespace {

constexpr std::size_t kMinWords = 10;
constexpr std::size_t kMaxWords = 100;
constexpr double kMinWordCharRatio = 0.15;
constexpr std::size_t kMaxTabs = 5;

const std::regex& call_pattern() {
  static const std::regex re(R"(\w+\([\w,\s]*?\))");
  return re;
}

}  // namespace

std::string_view to_string(RejectReason r) noexcept {
  switch (r) {
    case RejectReason::too_short: return "too-short";
    case RejectReason::too_long: return "too-long";
    case RejectReason::low_word_char_ratio: return "low-word-char-ratio";
    case RejectReason::too_many_tabs: return "too-many-tabs";
    case RejectReason::underscore: return "underscore";
    case RejectReason::code_definition: return "code-definition";
    case RejectReason::code_call: return "code-call";
    case RejectReason::markup_symbol: return "markup-symbol";
  }
  return "unknown";
}

FilterDecision filter_chat_prompt(std::string_view text) {
  const std::size_t words = word_count(text);
  if (words < kMinWords) return {RejectReason::too_short};
  if (words > kMaxWords) return {RejectReason::too_long};
  const double ratio = static_cast<double>(words) / static_cast<double>(utf8_length(text));
  if (ratio < kMinWordCharRatio) return {RejectReason::low_word_char_ratio};
  if (static_cast<std::size_t>(std::count(text.begin(), text.end(), '\t')) > kMaxTabs) {
    return {RejectReason::too_many_tabs};
  }
  if (text.find('_') != std::string_view::npos) return {RejectReason::underscore};
  if (text.find(":\n\t") != std::string_view::npos) return {RejectReason::code_definition};
  if (std::regex_search(text.begin(), text.end(), call_pattern())) {
    return {RejectReason::code_call};
  }
  if (text.find_first_of("{}<>") != std::string_view::npos) return {RejectReason::markup_symbol};
  return {};
}

FilterDecision filter_tweet(std::string_view text) {
  if (word_count(text) < kMinWords) return {RejectReason::too_short};
  return {};
}

}  // namespace improbe::dataset
