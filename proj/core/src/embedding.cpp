// SPDX-License-Identifier: Apache-2.0
#include "skillalign/embedding.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "skillalign/errors.hpp"
#include "skillalign/hash.hpp"

namespace skillalign {

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size())
        throw ValidationError("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw ValidationError("cosine: zero vector");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

MockEmbeddingProvider::MockEmbeddingProvider(std::size_t dim, std::uint64_t salt)
    : dim_(dim), salt_(salt) {
    if (dim_ == 0) throw ConfigError("mock embedding provider: dim must be > 0");
}

std::string MockEmbeddingProvider::fingerprint() const {
    return "mock:" + std::to_string(dim_);
}

std::vector<EmbeddingVector> MockEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        SplitMix64 rng(fnv1a64(text) ^ salt_);
        EmbeddingVector v(dim_);
        for (auto& x : v) x = rng.next_symmetric();
        // a zero vector is astronomically unlikely, but cosine forbids it
        bool all_zero = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
        if (all_zero) v[0] = 1.0;
        out.push_back(std::move(v));
    }
    return out;
}

EmbeddingStore EmbeddingStore::build(EmbeddingProvider& provider, const SkillTaxonomy& taxonomy,
                                     int max_retries) {
    EmbeddingStore store;
    store.dim_ = provider.dim();
    store.fingerprint_ = provider.fingerprint();
    store.ids_.reserve(taxonomy.size());
    store.vectors_.reserve(taxonomy.size());

    auto embed_batch = [&](const std::vector<std::string>& texts) {
        for (int attempt = 0;; ++attempt) {
            try {
                return provider.embed(texts);
            } catch (const ProviderError& e) {
                if (!e.transient() || attempt >= max_retries) throw;
                std::this_thread::sleep_for(std::chrono::milliseconds(50 << attempt));
            }
        }
    };

    constexpr std::size_t kBatch = 64;
    std::vector<std::string> batch_texts;
    std::vector<const std::string*> batch_ids;
    auto flush = [&] {
        if (batch_texts.empty()) return;
        auto vectors = embed_batch(batch_texts);
        if (vectors.size() != batch_texts.size())
            throw ProviderError("embedding provider returned " + std::to_string(vectors.size()) +
                                    " vectors for " + std::to_string(batch_texts.size()) + " texts",
                                false);
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            if (vectors[i].size() != store.dim_)
                throw ProviderError("embedding provider returned dim " + std::to_string(vectors[i].size()) +
                                        ", expected " + std::to_string(store.dim_),
                                    false);
            store.index_.emplace(*batch_ids[i], store.ids_.size());
            store.ids_.push_back(*batch_ids[i]);
            store.vectors_.push_back(std::move(vectors[i]));
        }
        batch_texts.clear();
        batch_ids.clear();
    };
    for (const Skill& s : taxonomy.skills()) {
        if (s.id.find_first_of(" \t\n") != std::string::npos)
            throw ValidationError("embedding store: skill id '" + s.id + "' contains whitespace");
        batch_texts.push_back(s.description);
        batch_ids.push_back(&s.id);
        if (batch_texts.size() == kBatch) flush();
    }
    flush();
    return store;
}

void EmbeddingStore::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open file for writing: " + path);
    out << "dim=" << dim_ << " fingerprint=" << fingerprint_ << "\n";
    char buf[64];
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        out << ids_[i];
        for (double x : vectors_[i]) {
            std::snprintf(buf, sizeof(buf), "%.9g", x);
            out << ' ' << buf;
        }
        out << '\n';
    }
}

EmbeddingStore EmbeddingStore::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw ValidationError("embedding store " + path + ": empty file");
    EmbeddingStore store;
    if (std::sscanf(header.c_str(), "dim=%zu", &store.dim_) != 1 || store.dim_ == 0)
        throw ValidationError("embedding store " + path + ": bad header '" + header + "'");
    auto fp_pos = header.find("fingerprint=");
    if (fp_pos == std::string::npos)
        throw ValidationError("embedding store " + path + ": header missing fingerprint");
    store.fingerprint_ = header.substr(fp_pos + 12);

    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string id;
        ss >> id;
        EmbeddingVector v;
        v.reserve(store.dim_);
        double x;
        while (ss >> x) v.push_back(x);
        if (v.size() != store.dim_)
            throw ValidationError("embedding store " + path + ": line " + std::to_string(lineno) + " has " +
                                  std::to_string(v.size()) + " values, expected " + std::to_string(store.dim_));
        if (!store.index_.emplace(id, store.ids_.size()).second)
            throw ValidationError("embedding store " + path + ": duplicate id " + id);
        store.ids_.push_back(std::move(id));
        store.vectors_.push_back(std::move(v));
    }
    return store;
}

const EmbeddingVector* EmbeddingStore::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &vectors_[it->second];
}

void validate_store_covers(const EmbeddingStore& store, const SkillTaxonomy& taxonomy) {
    for (const Skill& s : taxonomy.skills()) {
        if (!store.find(s.id))
            throw ValidationError("embedding store (" + store.fingerprint() + ") is missing skill " + s.id +
                                  "; re-run embed against the current taxonomy");
    }
}

std::vector<ScoredSkill> rank_skills_embedding(const EmbeddingStore& store,
                                               const EmbeddingVector& doc_vector, std::size_t k) {
    if (doc_vector.size() != store.dim())
        throw ValidationError("rank_skills_embedding: document vector dim " + std::to_string(doc_vector.size()) +
                              " does not match store dim " + std::to_string(store.dim()));
    if (k > store.size())
        throw ValidationError("rank_skills_embedding: k=" + std::to_string(k) + " exceeds store size " +
                              std::to_string(store.size()));

    std::vector<std::size_t> order(store.size());
    std::vector<double> scores(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        order[i] = i;
        scores[i] = cosine(doc_vector, store.vectors()[i]);
    }
    // full scan, exact; stable sort keeps taxonomy order on ties
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<ScoredSkill> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back({store.ids()[order[i]], scores[order[i]]});
    return out;
}

RetrievedCandidates retrieve_candidates(const EmbeddingStore& store, const EmbeddingVector& doc_vector) {
    RetrievedCandidates out;
    if (store.size() < kRetrievalPoolSize) {
        out.candidates = rank_skills_embedding(store, doc_vector, store.size());
        out.degenerate = true;
        return out;
    }
    out.candidates = rank_skills_embedding(store, doc_vector, kRetrievalPoolSize);
    return out;
}

}  // namespace skillalign
