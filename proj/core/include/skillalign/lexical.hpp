// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "skillalign/corpus.hpp"
#include "skillalign/types.hpp"

namespace skillalign {

/// Token relative frequencies from a large background corpus, loaded from a
/// `token,probability` CSV with a `#total_tokens=<count>` metadata line.
struct BackgroundFrequencies {
    std::unordered_map<std::string, double> probability;  // each in (0, 1]
    std::uint64_t total_token_count = 0;

    /// Background probability for a token, floored at 1/total_token_count
    /// for tokens the background never saw.
    double probability_for(std::string_view token) const;
};

BackgroundFrequencies load_background_frequencies(const std::string& path);
void save_background_frequencies(const BackgroundFrequencies& bg, const std::string& path);

/// Lowercases, splits on non-alphanumeric boundaries, drops a fixed English
/// stopword list and pure numbers. No stemming.
std::vector<std::string> tokenize(std::string_view text);

bool is_stopword(std::string_view token);

/// Relevance-weighted TF-IDF model over the skill vocabulary.
///
/// idf(t) = ln(N / df(t)) over skills, rel(t) = max(0, ln(p_skill(t) / p_bg(t))).
/// A document is scored against a skill by summing tf_doc(t) * idf(t) * rel(t)
/// over the distinct tokens shared with the skill, normalized by the token
/// count of the document.
class LexicalModel {
public:
    static LexicalModel build(const SkillTaxonomy& taxonomy, const BackgroundFrequencies& background);

    double idf(std::string_view token) const;        // 0 for unmodeled tokens
    double relevance(std::string_view token) const;  // 0 for unmodeled tokens

    double score(const CurriculumDocument& document, std::string_view skill_id) const;
    std::vector<ScoredSkill> rank(const CurriculumDocument& document, std::size_t k) const;

    const SkillTaxonomy& taxonomy() const { return taxonomy_; }

private:
    SkillTaxonomy taxonomy_;
    std::unordered_map<std::string, double> idf_;
    std::unordered_map<std::string, double> rel_;
    // distinct tokens per skill, aligned with taxonomy order
    std::vector<std::vector<std::string>> skill_tokens_;

    double score_counts(const std::unordered_map<std::string, std::size_t>& doc_counts,
                        std::size_t doc_len, std::size_t skill_index) const;
};

}  // namespace skillalign
