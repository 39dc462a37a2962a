// SPDX-License-Identifier: Apache-2.0
#include "skillalign/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "skillalign/csv.hpp"
#include "skillalign/errors.hpp"
#include "skillalign/hash.hpp"

namespace skillalign {

using nlohmann::json;

SkillTaxonomy SkillTaxonomy::from_skills(std::vector<Skill> skills, std::string source_label) {
    SkillTaxonomy t;
    t.skills_ = std::move(skills);
    t.source_label_ = std::move(source_label);
    for (std::size_t i = 0; i < t.skills_.size(); ++i) {
        const Skill& s = t.skills_[i];
        if (s.id.empty()) throw ValidationError("taxonomy: empty skill id at position " + std::to_string(i + 1));
        if (s.description.empty()) throw ValidationError("taxonomy: empty description for skill " + s.id);
        if (!t.index_.emplace(s.id, i).second) throw ValidationError("taxonomy: duplicate skill id " + s.id);
    }
    return t;
}

const Skill* SkillTaxonomy::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &skills_[it->second];
}

std::optional<std::size_t> SkillTaxonomy::index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::string to_string(Source s) {
    return s == Source::OpenSyllabus ? "open_syllabus" : "catalog";
}

std::string to_string(DocType t) {
    switch (t) {
        case DocType::CatalogDescription: return "catalog_description";
        case DocType::SyllabusDescription: return "syllabus_description";
        case DocType::SyllabusOutcomes: return "syllabus_outcomes";
        case DocType::SyllabusCombined: return "syllabus_combined";
    }
    return "?";
}

std::string to_string(LengthBucket b) {
    switch (b) {
        case LengthBucket::Short: return "short";
        case LengthBucket::Medium: return "medium";
        case LengthBucket::Long: return "long";
    }
    return "?";
}

Source source_from_string(std::string_view s) {
    if (s == "open_syllabus") return Source::OpenSyllabus;
    if (s == "catalog") return Source::Catalog;
    throw ValidationError("unknown source '" + std::string(s) + "' (allowed: open_syllabus, catalog)");
}

DocType doc_type_from_string(std::string_view s) {
    if (s == "catalog_description") return DocType::CatalogDescription;
    if (s == "syllabus_description") return DocType::SyllabusDescription;
    if (s == "syllabus_outcomes") return DocType::SyllabusOutcomes;
    if (s == "syllabus_combined") return DocType::SyllabusCombined;
    throw ValidationError("unknown doc_type '" + std::string(s) +
                          "' (allowed: catalog_description, syllabus_description, "
                          "syllabus_outcomes, syllabus_combined)");
}

LengthBucket length_bucket_from_string(std::string_view s) {
    if (s == "short") return LengthBucket::Short;
    if (s == "medium") return LengthBucket::Medium;
    if (s == "long") return LengthBucket::Long;
    throw ValidationError("unknown length_bucket '" + std::string(s) + "' (allowed: short, medium, long)");
}

SkillTaxonomy load_taxonomy(const std::string& path) {
    auto rows = read_csv_file(path);
    // drop comment lines
    std::erase_if(rows, [](const CsvRow& r) {
        return !r.fields.empty() && !r.fields[0].empty() && r.fields[0][0] == '#';
    });
    if (rows.empty()) throw ValidationError("taxonomy " + path + ": no skills (empty file)");
    const auto& header = rows.front().fields;
    if (header.size() < 2 || header[0] != "id" || header[1] != "description")
        throw ValidationError("taxonomy " + path + ": expected header 'id,description'");
    std::vector<Skill> skills;
    skills.reserve(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.fields.size() != 2)
            throw ValidationError("taxonomy " + path + ": malformed row at line " + std::to_string(row.line) +
                                  " (expected 2 fields, got " + std::to_string(row.fields.size()) + ")");
        if (row.fields[1].empty())
            throw ValidationError("taxonomy " + path + ": empty description at line " + std::to_string(row.line));
        skills.push_back({row.fields[0], row.fields[1]});
    }
    if (skills.empty()) throw ValidationError("taxonomy " + path + ": no skills");
    return SkillTaxonomy::from_skills(std::move(skills), path);
}

namespace {

void validate_document(const CurriculumDocument& d) {
    if (d.id.empty()) throw ValidationError("corpus: empty document id");
    if (d.text.empty()) throw ValidationError("corpus: empty text for document " + d.id);
    bool catalog_type = d.doc_type == DocType::CatalogDescription;
    bool catalog_source = d.source == Source::Catalog;
    if (catalog_type != catalog_source)
        throw ValidationError("corpus: document " + d.id + " has source=" + to_string(d.source) +
                              " inconsistent with doc_type=" + to_string(d.doc_type));
}

}  // namespace

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    Corpus corpus;
    std::set<std::pair<std::string, DocType>> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError("corpus " + path + ": invalid record at line " + std::to_string(lineno) +
                                  ": " + e.what());
        }
        CurriculumDocument d;
        try {
            d.id = j.at("id").get<std::string>();
            d.source = source_from_string(j.at("source").get<std::string>());
            d.doc_type = doc_type_from_string(j.at("doc_type").get<std::string>());
            d.subject = j.at("subject").get<std::string>();
            d.length_bucket = length_bucket_from_string(j.at("length_bucket").get<std::string>());
            d.text = j.at("text").get<std::string>();
        } catch (const json::exception& e) {
            throw ValidationError("corpus " + path + ": line " + std::to_string(lineno) + ": " + e.what());
        }
        validate_document(d);
        if (!seen.insert({d.id, d.doc_type}).second)
            throw ValidationError("corpus " + path + ": duplicate (id, doc_type) = (" + d.id + ", " +
                                  to_string(d.doc_type) + ")");
        corpus.documents.push_back(std::move(d));
    }
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open file for writing: " + path);
    for (const auto& d : corpus.documents) {
        json j;
        j["id"] = d.id;
        j["source"] = to_string(d.source);
        j["doc_type"] = to_string(d.doc_type);
        j["subject"] = d.subject;
        j["length_bucket"] = to_string(d.length_bucket);
        j["text"] = d.text;
        out << j.dump() << '\n';
    }
}

CurriculumDocument derive_combined_view(const CurriculumDocument& description_doc,
                                        const CurriculumDocument& outcomes_doc) {
    if (description_doc.id != outcomes_doc.id)
        throw ValidationError("combined view: id mismatch (" + description_doc.id + " vs " + outcomes_doc.id + ")");
    if (description_doc.doc_type != DocType::SyllabusDescription)
        throw ValidationError("combined view: first input must be syllabus_description, got " +
                              to_string(description_doc.doc_type));
    if (outcomes_doc.doc_type != DocType::SyllabusOutcomes)
        throw ValidationError("combined view: second input must be syllabus_outcomes, got " +
                              to_string(outcomes_doc.doc_type));
    if (description_doc.source != Source::OpenSyllabus || outcomes_doc.source != Source::OpenSyllabus)
        throw ValidationError("combined view: both inputs must come from open_syllabus");
    CurriculumDocument combined = description_doc;
    combined.doc_type = DocType::SyllabusCombined;
    combined.text = description_doc.text + "\n\n" + outcomes_doc.text;
    return combined;
}

namespace {

std::string stratum_key(const CurriculumDocument& d, const std::vector<std::string>& keys) {
    std::string out;
    for (const auto& k : keys) {
        if (!out.empty()) out += '\x1f';
        if (k == "subject") out += d.subject;
        else if (k == "length_bucket") out += to_string(d.length_bucket);
        else if (k == "source") out += to_string(d.source);
        else throw ValidationError("stratified_sample: unknown strata key '" + k +
                                   "' (allowed: subject, length_bucket, source)");
    }
    return out;
}

}  // namespace

Corpus stratified_sample(const Corpus& corpus, std::size_t n,
                         const std::vector<std::string>& strata_keys, std::uint64_t seed) {
    if (n > corpus.size())
        throw ValidationError("stratified_sample: n=" + std::to_string(n) + " exceeds corpus size " +
                              std::to_string(corpus.size()));
    for (const auto& k : strata_keys) stratum_key(CurriculumDocument{}, {k});  // validates key names

    // std::map keeps strata in key order, which the remainder tie-break relies on.
    std::map<std::string, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < corpus.documents.size(); ++i)
        strata[stratum_key(corpus.documents[i], strata_keys)].push_back(i);

    const double total = static_cast<double>(corpus.size());
    struct Alloc {
        const std::string* key;
        const std::vector<std::size_t>* members;
        std::size_t count;
        double quota;
    };
    std::vector<Alloc> allocs;
    allocs.reserve(strata.size());
    std::size_t assigned = 0;
    for (const auto& [key, members] : strata) {
        double quota = static_cast<double>(n) * static_cast<double>(members.size()) / total;
        auto floor_count = static_cast<std::size_t>(std::floor(quota + 1e-12));
        allocs.push_back({&key, &members, floor_count, quota});
        assigned += floor_count;
    }

    // Largest-remainder (Hamilton) rounding: leftover units go to the largest
    // fractional remainders; ties broken by larger quota, then key order.
    std::vector<std::size_t> order(allocs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double ra = allocs[a].quota - std::floor(allocs[a].quota + 1e-12);
        double rb = allocs[b].quota - std::floor(allocs[b].quota + 1e-12);
        if (ra != rb) return ra > rb;
        if (allocs[a].quota != allocs[b].quota) return allocs[a].quota > allocs[b].quota;
        return *allocs[a].key < *allocs[b].key;
    });
    for (std::size_t i = 0; assigned < n; ++i) {
        allocs[order[i % order.size()]].count += 1;
        ++assigned;
    }

    std::vector<std::size_t> selected;
    selected.reserve(n);
    for (const auto& alloc : allocs) {
        std::vector<std::size_t> members = *alloc.members;
        // Per-stratum stream derived from (seed, stratum key) so strata are
        // independent of each other's sizes.
        seeded_shuffle(members, seed ^ fnv1a64(*alloc.key));
        std::size_t take = std::min(alloc.count, members.size());
        selected.insert(selected.end(), members.begin(), members.begin() + take);
    }
    std::sort(selected.begin(), selected.end());

    Corpus out;
    out.documents.reserve(selected.size());
    for (std::size_t idx : selected) out.documents.push_back(corpus.documents[idx]);
    return out;
}

}  // namespace skillalign
