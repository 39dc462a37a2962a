// SPDX-License-Identifier: Apache-2.0
#include "skillalign/lexical.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_set>

#include "skillalign/csv.hpp"
#include "skillalign/errors.hpp"

namespace skillalign {

namespace {

const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words = {
        "a",       "about",  "above",   "after",  "again",   "against", "all",    "am",     "an",
        "and",     "any",    "are",     "as",     "at",      "be",      "because", "been",  "before",
        "being",   "below",  "between", "both",   "but",     "by",      "can",    "cannot", "could",
        "did",     "do",     "does",    "doing",  "down",    "during",  "each",   "few",    "for",
        "from",    "further", "had",    "has",    "have",    "having",  "he",     "her",    "here",
        "hers",    "him",    "his",     "how",    "i",       "if",      "in",     "into",   "is",
        "it",      "its",    "itself",  "just",   "me",      "more",    "most",   "my",     "no",
        "nor",     "not",    "now",     "of",     "off",     "on",      "once",   "only",   "or",
        "other",   "our",    "ours",    "out",    "over",    "own",     "s",      "same",   "she",
        "should",  "so",     "some",    "such",   "t",       "than",    "that",   "the",    "their",
        "theirs",  "them",   "then",    "there",  "these",   "they",    "this",   "those",  "through",
        "to",      "too",    "under",   "until",  "up",      "upon",    "very",   "was",    "we",
        "were",    "what",   "when",    "where",  "which",   "while",   "who",    "whom",   "why",
        "will",    "with",   "would",   "you",    "your",    "yours",
    };
    return words;
}

}  // namespace

bool is_stopword(std::string_view token) {
    return stopwords().count(std::string(token)) > 0;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    bool all_digits = true;
    auto flush = [&] {
        if (!current.empty() && !all_digits && !is_stopword(current)) tokens.push_back(current);
        current.clear();
        all_digits = true;
    };
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            if (!std::isdigit(c)) all_digits = false;
            current += static_cast<char>(std::tolower(c));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

double BackgroundFrequencies::probability_for(std::string_view token) const {
    auto it = probability.find(std::string(token));
    if (it != probability.end()) return it->second;
    return 1.0 / static_cast<double>(total_token_count);
}

BackgroundFrequencies load_background_frequencies(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    BackgroundFrequencies bg;
    std::string line;
    std::vector<std::string> data_lines;
    std::size_t lineno = 0;
    bool header_seen = false;
    double sum = 0.0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (line.rfind("#total_tokens=", 0) == 0) {
                bg.total_token_count = std::stoull(line.substr(eq + 1));
            }
            continue;
        }
        if (!header_seen) {
            if (line != "token,probability")
                throw ValidationError("background " + path + ": expected header 'token,probability'");
            header_seen = true;
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ValidationError("background " + path + ": malformed row at line " + std::to_string(lineno));
        std::string token = line.substr(0, comma);
        double p = std::stod(line.substr(comma + 1));
        if (!(p > 0.0 && p <= 1.0))
            throw ValidationError("background " + path + ": probability out of (0,1] for token '" + token + "'");
        if (!bg.probability.emplace(token, p).second)
            throw ValidationError("background " + path + ": duplicate token '" + token + "'");
        sum += p;
    }
    if (bg.total_token_count == 0)
        throw ValidationError("background " + path + ": missing '#total_tokens=<count>' metadata line");
    if (sum > 1.0 + 1e-9)
        throw ValidationError("background " + path + ": probabilities sum to " + std::to_string(sum) + " > 1");
    return bg;
}

void save_background_frequencies(const BackgroundFrequencies& bg, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open file for writing: " + path);
    out << "#total_tokens=" << bg.total_token_count << "\n";
    out << "token,probability\n";
    std::vector<std::pair<std::string, double>> rows(bg.probability.begin(), bg.probability.end());
    std::sort(rows.begin(), rows.end());
    char buf[64];
    for (const auto& [token, p] : rows) {
        std::snprintf(buf, sizeof(buf), "%.12g", p);
        out << token << ',' << buf << '\n';
    }
}

LexicalModel LexicalModel::build(const SkillTaxonomy& taxonomy, const BackgroundFrequencies& background) {
    if (taxonomy.size() == 0) throw ValidationError("lexical model: empty taxonomy");
    LexicalModel m;
    m.taxonomy_ = taxonomy;
    m.skill_tokens_.reserve(taxonomy.size());

    std::unordered_map<std::string, std::size_t> df;
    std::unordered_map<std::string, std::size_t> skill_counts;
    std::size_t total_skill_tokens = 0;
    for (const Skill& s : taxonomy.skills()) {
        auto tokens = tokenize(s.description);
        total_skill_tokens += tokens.size();
        for (const auto& t : tokens) ++skill_counts[t];
        std::set<std::string> distinct(tokens.begin(), tokens.end());
        for (const auto& t : distinct) ++df[t];
        m.skill_tokens_.emplace_back(distinct.begin(), distinct.end());
    }

    const double n = static_cast<double>(taxonomy.size());
    for (const auto& [token, d] : df)
        m.idf_[token] = std::log(n / static_cast<double>(d));
    for (const auto& [token, count] : skill_counts) {
        double p_skill = static_cast<double>(count) / static_cast<double>(total_skill_tokens);
        double p_bg = background.probability_for(token);
        m.rel_[token] = std::max(0.0, std::log(p_skill / p_bg));
    }
    return m;
}

double LexicalModel::idf(std::string_view token) const {
    auto it = idf_.find(std::string(token));
    return it == idf_.end() ? 0.0 : it->second;
}

double LexicalModel::relevance(std::string_view token) const {
    auto it = rel_.find(std::string(token));
    return it == rel_.end() ? 0.0 : it->second;
}

double LexicalModel::score_counts(const std::unordered_map<std::string, std::size_t>& doc_counts,
                                  std::size_t doc_len, std::size_t skill_index) const {
    if (doc_len == 0) return 0.0;
    double sum = 0.0;
    for (const auto& token : skill_tokens_[skill_index]) {
        auto it = doc_counts.find(token);
        if (it == doc_counts.end()) continue;
        sum += static_cast<double>(it->second) * idf_.at(token) * rel_.at(token);
    }
    return sum / static_cast<double>(doc_len);
}

double LexicalModel::score(const CurriculumDocument& document, std::string_view skill_id) const {
    auto index = taxonomy_.index_of(skill_id);
    if (!index) throw ValidationError("lexical score: skill " + std::string(skill_id) + " not in model taxonomy");
    auto tokens = tokenize(document.text);
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& t : tokens) ++counts[t];
    return score_counts(counts, tokens.size(), *index);
}

std::vector<ScoredSkill> LexicalModel::rank(const CurriculumDocument& document, std::size_t k) const {
    if (k > taxonomy_.size())
        throw ValidationError("lexical rank: k=" + std::to_string(k) + " exceeds taxonomy size " +
                              std::to_string(taxonomy_.size()));
    auto tokens = tokenize(document.text);
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& t : tokens) ++counts[t];

    std::vector<std::size_t> order(taxonomy_.size());
    std::vector<double> scores(taxonomy_.size());
    for (std::size_t i = 0; i < taxonomy_.size(); ++i) {
        order[i] = i;
        scores[i] = score_counts(counts, tokens.size(), i);
    }
    // descending score, ties by taxonomy order
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<ScoredSkill> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i)
        out.push_back({taxonomy_.skills()[order[i]].id, scores[order[i]]});
    return out;
}

}  // namespace skillalign
