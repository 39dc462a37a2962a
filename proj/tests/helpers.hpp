// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "skillalign/corpus.hpp"
#include "skillalign/lexical.hpp"

namespace testutil {

/// Self-deleting scratch directory.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        std::random_device rd;
        path_ = base / ("skillalign-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// The three-skill fixture used across the lexical tests; descriptions
/// chosen so every token survives the stopword filter.
inline skillalign::SkillTaxonomy toy_taxonomy() {
    return skillalign::SkillTaxonomy::from_skills({
        {"T1", "Analyze financial data trends"},
        {"T2", "Write technical project reports"},
        {"T3", "Teach data analysis methods"},
    });
}

inline skillalign::BackgroundFrequencies toy_background() {
    skillalign::BackgroundFrequencies bg;
    bg.total_token_count = 1000000;
    bg.probability = {
        {"data", 0.002},      {"analyze", 0.0001},  {"financial", 0.0005}, {"write", 0.001},
        {"technical", 0.0004}, {"reports", 0.0003}, {"teach", 0.0002},     {"analysis", 0.0006},
        {"methods", 0.0007},   {"trends", 0.00015}, {"project", 0.0012},
    };
    return bg;
}

inline skillalign::CurriculumDocument make_document(std::string id, skillalign::DocType doc_type,
                                                    std::string text, std::string subject = "general") {
    skillalign::CurriculumDocument d;
    d.id = std::move(id);
    d.doc_type = doc_type;
    d.source = doc_type == skillalign::DocType::CatalogDescription ? skillalign::Source::Catalog
                                                                   : skillalign::Source::OpenSyllabus;
    d.subject = std::move(subject);
    d.length_bucket = skillalign::LengthBucket::Medium;
    d.text = std::move(text);
    return d;
}

}  // namespace testutil
