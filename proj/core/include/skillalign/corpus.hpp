// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace skillalign {

/// A short work-activity description with a stable id. The closed vocabulary
/// every alignment strategy ranks over.
struct Skill {
    std::string id;
    std::string description;
};

/// Ordered skill vocabulary. Iteration order is insertion order and is the
/// tie-break order used throughout ranking.
class SkillTaxonomy {
public:
    SkillTaxonomy() = default;
    static SkillTaxonomy from_skills(std::vector<Skill> skills, std::string source_label = "");

    const std::vector<Skill>& skills() const { return skills_; }
    std::size_t size() const { return skills_.size(); }
    const std::string& source_label() const { return source_label_; }

    const Skill* find(std::string_view id) const;
    std::optional<std::size_t> index_of(std::string_view id) const;

private:
    std::vector<Skill> skills_;
    std::unordered_map<std::string, std::size_t> index_;
    std::string source_label_;
};

enum class Source { OpenSyllabus, Catalog };

enum class DocType {
    CatalogDescription,
    SyllabusDescription,
    SyllabusOutcomes,
    SyllabusCombined,
};

enum class LengthBucket { Short, Medium, Long };

std::string to_string(Source s);
std::string to_string(DocType t);
std::string to_string(LengthBucket b);
Source source_from_string(std::string_view s);
DocType doc_type_from_string(std::string_view s);
LengthBucket length_bucket_from_string(std::string_view s);

/// One course text in one of the four document-type views.
struct CurriculumDocument {
    std::string id;
    Source source = Source::OpenSyllabus;
    DocType doc_type = DocType::SyllabusDescription;
    std::string subject;
    LengthBucket length_bucket = LengthBucket::Medium;
    std::string text;
};

struct Corpus {
    std::vector<CurriculumDocument> documents;
    std::size_t size() const { return documents.size(); }
};

/// Loads a `id,description` CSV. Rejects duplicate ids, empty descriptions,
/// and malformed rows, naming the offender.
SkillTaxonomy load_taxonomy(const std::string& path);

/// Loads a newline-delimited JSON corpus and validates every record against
/// the CurriculumDocument invariants (non-empty text, doc_type consistent
/// with source, unique (id, doc_type)).
Corpus load_corpus(const std::string& path);

void save_corpus(const Corpus& corpus, const std::string& path);

/// Joins a syllabus description and its outcomes into the combined view:
/// description text, one blank line, outcomes text.
CurriculumDocument derive_combined_view(const CurriculumDocument& description_doc,
                                        const CurriculumDocument& outcomes_doc);

/// Proportional stratified sampling with largest-remainder rounding and a
/// seeded uniform shuffle inside each stratum. Deterministic for a fixed
/// (corpus, n, strata_keys, seed); output keeps original corpus order.
/// strata_keys may contain "subject", "length_bucket", "source".
Corpus stratified_sample(const Corpus& corpus, std::size_t n,
                         const std::vector<std::string>& strata_keys, std::uint64_t seed);

}  // namespace skillalign
