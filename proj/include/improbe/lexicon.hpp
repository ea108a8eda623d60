#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "improbe/csv.hpp"
#include "improbe/types.hpp"

namespace improbe::lexicon {

enum class Dictionary { sociability, morality, ability, agency };

std::string_view to_string(Dictionary d) noexcept;
Dimension dimension_of(Dictionary d) noexcept;

struct TraitEntry {
  std::string term;  // case preserved as loaded
  Dictionary dictionary;
  Dimension dimension;
  Direction direction;

  friend bool operator==(const TraitEntry&, const TraitEntry&) = default;
};

struct DroppedRow {
  std::string term;
  std::string dictionary;
};

struct LexiconLoad {
  std::vector<TraitEntry> entries;
  std::vector<DroppedRow> dropped;  // rows outside the four SCM dictionaries

  std::vector<TraitEntry> of(Dimension d) const;
};

// Columns: term,dictionary,direction. Dimension is always derived from the
// dictionary, never read.
LexiconLoad load_lexicon(const CsvTable& rows);
LexiconLoad read_lexicon(const std::filesystem::path& path);

enum class SpecOrder { warmth_first, competence_first, single };
std::string_view to_string(SpecOrder o) noexcept;
SpecOrder parse_order(std::string_view s);

struct ImpressionSpec {
  std::string spec_id;
  std::optional<TraitEntry> warmth_trait;
  std::optional<TraitEntry> competence_trait;
  SpecOrder order;

  // Terms in prompt order.
  std::vector<std::string> terms() const;
};

// Stable 16-hex-digit id from (terms, order).
std::string make_spec_id(const std::optional<TraitEntry>& warmth,
                         const std::optional<TraitEntry>& competence, SpecOrder order);

ImpressionSpec make_spec(std::optional<TraitEntry> warmth, std::optional<TraitEntry> competence,
                         SpecOrder order);

struct SpecEnumeration {
  std::vector<ImpressionSpec> specs;
  std::uint64_t slot_count = 0;  // specs.size() * samples_per_spec
};

// samples * (2|W||C| + |W| + |C|) generation slots.
constexpr std::uint64_t slot_count(std::uint64_t n_warmth, std::uint64_t n_competence,
                                   std::uint64_t samples_per_spec) noexcept {
  return samples_per_spec * (2 * n_warmth * n_competence + n_warmth + n_competence);
}

// Order: warmth-first pairs, competence-first pairs, warmth singles,
// competence singles; each block lexicographic by term.
SpecEnumeration enumerate_specs(std::vector<TraitEntry> warmth,
                                std::vector<TraitEntry> competence, int samples_per_spec);

std::string render_generation_prompt(const ImpressionSpec& spec);

struct SpecLabels {
  std::optional<Direction> warmth;
  std::optional<Direction> competence;

  std::optional<Direction> of(Dimension d) const {
    return d == Dimension::warmth ? warmth : competence;
  }
  friend bool operator==(const SpecLabels&, const SpecLabels&) = default;
};

SpecLabels labels_of_spec(const ImpressionSpec& spec);

// spec_id,warmth_term,competence_term,order,prompt_text
void write_spec_manifest(std::ostream& out, const std::vector<ImpressionSpec>& specs);
// spec_id,warmth,competence (high/low/empty)
void write_spec_labels(std::ostream& out, const std::vector<ImpressionSpec>& specs);

}  // namespace improbe::lexicon
