// SPDX-License-Identifier: Apache-2.0
#include "skillalign/prompts.hpp"

#include <fstream>
#include <sstream>

#include "skillalign/errors.hpp"
#include "skillalign/hash.hpp"

namespace skillalign {

std::string prompt_sha256(const Prompt& prompt) {
    return sha256_hex(prompt.system_text + "\n---\n" + prompt.user_text);
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open prompt template: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string replace_all(std::string text, std::string_view placeholder, std::string_view value) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        std::size_t hit = text.find(placeholder, pos);
        if (hit == std::string::npos) {
            out.append(text, pos, std::string::npos);
            return out;
        }
        out.append(text, pos, hit - pos);
        out.append(value);
        pos = hit + placeholder.size();
    }
}

std::string format_skill_lines(const SkillTaxonomy& taxonomy) {
    std::string out;
    for (const Skill& s : taxonomy.skills()) {
        out += s.id;
        out += ": ";
        out += s.description;
        out += '\n';
    }
    if (!out.empty()) out.pop_back();
    return out;
}

std::string format_candidate_lines(const std::vector<ScoredSkill>& candidates,
                                   const SkillTaxonomy& taxonomy) {
    std::string out;
    for (const auto& c : candidates) {
        const Skill* s = taxonomy.find(c.skill_id);
        if (!s) throw ValidationError("rag prompt: candidate " + c.skill_id + " not in taxonomy");
        out += s->id;
        out += ": ";
        out += s->description;
        out += '\n';
    }
    if (!out.empty()) out.pop_back();
    return out;
}

std::string format_rubric(const Rubric& rubric) {
    std::string out;
    for (const auto& row : rubric.rows) {
        out += std::to_string(row.score);
        out += ": ";
        out += row.criteria;
        out += '\n';
    }
    if (!out.empty()) out.pop_back();
    return out;
}

std::string format_exemplars(const std::vector<JudgeExemplar>& exemplars) {
    std::string out;
    for (const auto& e : exemplars) {
        out += "Course excerpt: " + e.course_excerpt + '\n';
        out += "Skill: " + e.skill_description + '\n';
        out += "Justification: " + e.justification + '\n';
        out += "Score: " + std::to_string(e.score) + "\n\n";
    }
    while (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

}  // namespace

PromptTemplates PromptTemplates::load_dir(const std::string& dir) {
    PromptTemplates t;
    t.zero_shot_system = read_file(dir + "/zero_shot_system.txt");
    t.zero_shot_user = read_file(dir + "/zero_shot_user.txt");
    t.rag_system = read_file(dir + "/rag_system.txt");
    t.rag_user = read_file(dir + "/rag_user.txt");
    t.judge_system = read_file(dir + "/judge_system.txt");
    t.judge_user = read_file(dir + "/judge_user.txt");
    return t;
}

const Rubric& Rubric::default_rubric() {
    static const Rubric rubric = {{
        {5, "Core learning objective of the course; explicitly covered."},
        {4, "Aligns with the course; students should be able to perform it after completion."},
        {3, "Not explicitly covered, but transferable skills may be developed."},
        {2, "Within the same domain, but not directly relevant."},
        {1, "Outside the scope of the course; belongs to a different domain."},
    }};
    return rubric;
}

const std::vector<JudgeExemplar>& default_judge_exemplars() {
    static const std::vector<JudgeExemplar> exemplars = {
        {"Introductory statistics: descriptive statistics, hypothesis testing, and regression, "
         "with weekly labs analyzing real datasets in R.",
         "Analyze data to identify trends or relationships among variables.", 5,
         "Data analysis is the stated core objective and is practiced in every lab."},
        {"Introductory statistics with weekly computer labs in R.",
         "Prepare analytical reports summarizing quantitative findings.", 4,
         "Lab write-ups require summarizing quantitative results even though reporting is not a "
         "named objective."},
        {"Survey of European art history from the Renaissance to 1900.",
         "Present research findings to groups.", 3,
         "Seminar discussion may build presentation ability, but presenting is not taught or "
         "assessed directly."},
        {"Organic chemistry lecture covering reaction mechanisms and synthesis.",
         "Maintain laboratory equipment and instrumentation.", 2,
         "Same domain as chemistry but this lecture course involves no equipment work."},
        {"Beginning conversational Spanish for travelers.",
         "Design electrical circuits or wiring layouts.", 1,
         "Circuit design belongs to a different field entirely."},
    };
    return exemplars;
}

Prompt build_zero_shot_prompt(const PromptTemplates& templates, const CurriculumDocument& document,
                              const SkillTaxonomy& taxonomy, std::size_t k) {
    Prompt p;
    p.system_text = templates.zero_shot_system;
    std::string user = templates.zero_shot_user;
    user = replace_all(std::move(user), "{{doc_type}}", to_string(document.doc_type));
    user = replace_all(std::move(user), "{{document}}", document.text);
    user = replace_all(std::move(user), "{{skills}}", format_skill_lines(taxonomy));
    user = replace_all(std::move(user), "{{k}}", std::to_string(k));
    p.user_text = std::move(user);
    return p;
}

Prompt build_rag_prompt(const PromptTemplates& templates, const CurriculumDocument& document,
                        const std::vector<ScoredSkill>& candidates, const SkillTaxonomy& taxonomy,
                        std::size_t k) {
    if (candidates.empty()) throw ValidationError("rag prompt: empty candidate list");
    Prompt p;
    p.system_text = templates.rag_system;
    std::string user = templates.rag_user;
    user = replace_all(std::move(user), "{{doc_type}}", to_string(document.doc_type));
    user = replace_all(std::move(user), "{{document}}", document.text);
    user = replace_all(std::move(user), "{{candidates}}", format_candidate_lines(candidates, taxonomy));
    user = replace_all(std::move(user), "{{k}}", std::to_string(k));
    p.user_text = std::move(user);
    return p;
}

Prompt build_judge_prompt(const PromptTemplates& templates, const CurriculumDocument& document,
                          const Skill& skill, const Rubric& rubric,
                          const std::vector<JudgeExemplar>& exemplars) {
    if (rubric.rows.empty()) throw ValidationError("judge prompt: empty rubric");
    if (exemplars.empty()) throw ValidationError("judge prompt: at least one few-shot exemplar required");
    Prompt p;
    p.system_text = templates.judge_system;
    std::string user = templates.judge_user;
    user = replace_all(std::move(user), "{{rubric}}", format_rubric(rubric));
    user = replace_all(std::move(user), "{{exemplars}}", format_exemplars(exemplars));
    user = replace_all(std::move(user), "{{doc_type}}", to_string(document.doc_type));
    user = replace_all(std::move(user), "{{document}}", document.text);
    user = replace_all(std::move(user), "{{skill}}", skill.id + ": " + skill.description);
    p.user_text = std::move(user);
    return p;
}

Prompt build_zero_shot_prompt(const CurriculumDocument& document, const SkillTaxonomy& taxonomy,
                              std::size_t k) {
    return build_zero_shot_prompt(PromptTemplates::builtin(), document, taxonomy, k);
}

Prompt build_rag_prompt(const CurriculumDocument& document, const std::vector<ScoredSkill>& candidates,
                        const SkillTaxonomy& taxonomy, std::size_t k) {
    return build_rag_prompt(PromptTemplates::builtin(), document, candidates, taxonomy, k);
}

Prompt build_judge_prompt(const CurriculumDocument& document, const Skill& skill) {
    return build_judge_prompt(PromptTemplates::builtin(), document, skill, Rubric::default_rubric(),
                              default_judge_exemplars());
}

}  // namespace skillalign
