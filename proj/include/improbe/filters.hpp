#pragma once

#include <optional>
#include <string_view>

namespace improbe::dataset {

enum class RejectReason {
  too_short,            // fewer than 10 words
  too_long,             // more than 100 words
  low_word_char_ratio,  // words / characters < 0.15
  too_many_tabs,        // more than 5 tab characters
  underscore,           // any '_'
  code_definition,      // ":\n\t"
  code_call,            // identifier followed by a parenthesised argument list
  markup_symbol,        // any of { } < >
};

std::string_view to_string(RejectReason r) noexcept;

struct FilterDecision {
  std::optional<RejectReason> reason;  // nullopt means keep

  bool keep() const noexcept { return !reason.has_value(); }
};

// Chat-prompt heuristics, checked in the order they are declared above;
// the first failing rule is reported.
FilterDecision filter_chat_prompt(std::string_view text);

// Tweets are only required to have at least 10 words.
FilterDecision filter_tweet(std::string_view text);

}  // namespace improbe::dataset
