#pragma once

#include "mrfe/precision.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mrfe::inline MRFE_PRECISION::lexicon {

// Groups of interchangeable sentiment adjectives and domain nouns. Members of
// one group never differ in polarity.
const std::vector<std::vector<std::string>>& synonym_groups();

// Other members of the word's group, in group order; empty if unknown.
const std::vector<std::string>& synonyms_of(std::string_view word);

// Adjective/noun lexicon used to pick mask targets (every synonym-table word).
bool is_maskable(std::string_view word);

bool is_stopword(std::string_view word);

// Eight emotion labels with about ten seed words each.
const std::vector<std::pair<std::string, std::vector<std::string>>>& emotion_seeds();

const std::vector<std::string>& negation_cues();
const std::vector<std::string>& hedge_cues();

} // namespace mrfe::lexicon
