// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "skillalign/corpus.hpp"
#include "skillalign/types.hpp"

namespace skillalign {

struct Prompt {
    std::string system_text;
    std::string user_text;
};

/// sha256 over "system\n---\nuser"; the key used for mock fixtures, ledger
/// records, and the audit log.
std::string prompt_sha256(const Prompt& prompt);

/// Versioned prompt wording. The built-in set is embedded at build time from
/// core/prompts/*.txt; load_dir() reads the same six files from a directory
/// so deployments can override wording without rebuilding.
struct PromptTemplates {
    std::string zero_shot_system;
    std::string zero_shot_user;
    std::string rag_system;
    std::string rag_user;
    std::string judge_system;
    std::string judge_user;

    static const PromptTemplates& builtin();
    static PromptTemplates load_dir(const std::string& dir);
};

struct RubricRow {
    int score;
    std::string criteria;
};

/// The 1-5 alignment rubric embedded verbatim in every judge prompt.
struct Rubric {
    std::vector<RubricRow> rows;
    static const Rubric& default_rubric();
};

/// A scored few-shot example for judge prompts. The bundled default set has
/// one exemplar per score band.
struct JudgeExemplar {
    std::string course_excerpt;
    std::string skill_description;
    int score;
    std::string justification;
};

const std::vector<JudgeExemplar>& default_judge_exemplars();

Prompt build_zero_shot_prompt(const PromptTemplates& templates, const CurriculumDocument& document,
                              const SkillTaxonomy& taxonomy, std::size_t k);

Prompt build_rag_prompt(const PromptTemplates& templates, const CurriculumDocument& document,
                        const std::vector<ScoredSkill>& candidates, const SkillTaxonomy& taxonomy,
                        std::size_t k);

Prompt build_judge_prompt(const PromptTemplates& templates, const CurriculumDocument& document,
                          const Skill& skill, const Rubric& rubric,
                          const std::vector<JudgeExemplar>& exemplars);

// Convenience overloads using the built-in templates.
Prompt build_zero_shot_prompt(const CurriculumDocument& document, const SkillTaxonomy& taxonomy,
                              std::size_t k);
Prompt build_rag_prompt(const CurriculumDocument& document, const std::vector<ScoredSkill>& candidates,
                        const SkillTaxonomy& taxonomy, std::size_t k);
Prompt build_judge_prompt(const CurriculumDocument& document, const Skill& skill);

}  // namespace skillalign
