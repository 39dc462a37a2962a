// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "skillalign/corpus.hpp"
#include "skillalign/types.hpp"

namespace skillalign {

using EmbeddingVector = std::vector<double>;

/// Number of candidates the retrieval pre-filter hands to the generator.
inline constexpr std::size_t kRetrievalPoolSize = 20;

/// cosine(a, b) = dot(a,b) / (|a| * |b|), clamped to [-1, 1] against rounding.
/// Throws on dimension mismatch or zero vectors.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Deterministic text-embedding contract: embed() returns one vector per
/// input text, all of dimension dim(), identical across calls for the same
/// (provider, text).
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::string fingerprint() const = 0;  // model id + dim, e.g. "mock:8"
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

/// Offline provider: each vector is the text's hash expanded through a
/// SplitMix64 stream, so outputs are a pure function of the text.
class MockEmbeddingProvider : public EmbeddingProvider {
public:
    explicit MockEmbeddingProvider(std::size_t dim = 8, std::uint64_t salt = 0);
    std::string name() const override { return "mock"; }
    std::size_t dim() const override { return dim_; }
    std::string fingerprint() const override;
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

private:
    std::size_t dim_;
    std::uint64_t salt_;
};

/// Skill-id -> vector map in taxonomy order, uniform dimension, with the
/// producing provider's fingerprint. Immutable once built.
class EmbeddingStore {
public:
    EmbeddingStore() = default;

    /// Embeds skills in batches. Transient provider failures are retried up
    /// to max_retries with exponential backoff before giving up.
    static EmbeddingStore build(EmbeddingProvider& provider, const SkillTaxonomy& taxonomy,
                                int max_retries = 3);
    static EmbeddingStore load(const std::string& path);
    void save(const std::string& path) const;

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return dim_; }
    const std::string& fingerprint() const { return fingerprint_; }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<EmbeddingVector>& vectors() const { return vectors_; }
    const EmbeddingVector* find(std::string_view id) const;

private:
    std::size_t dim_ = 0;
    std::string fingerprint_;
    std::vector<std::string> ids_;
    std::vector<EmbeddingVector> vectors_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Verifies a (typically reloaded) store still holds a vector for every
/// skill in the taxonomy; throws naming the first missing id.
void validate_store_covers(const EmbeddingStore& store, const SkillTaxonomy& taxonomy);

/// Exact top-k by descending cosine over a full scan; ties broken by store
/// (taxonomy) order. Throws if k exceeds the store size or dims mismatch.
std::vector<ScoredSkill> rank_skills_embedding(const EmbeddingStore& store,
                                               const EmbeddingVector& doc_vector, std::size_t k);

struct RetrievedCandidates {
    std::vector<ScoredSkill> candidates;
    bool degenerate = false;  // store was smaller than the retrieval pool
};

/// Top-20 retrieval feeding the RAG prompt; a store smaller than 20 returns
/// everything with the degenerate flag set.
RetrievedCandidates retrieve_candidates(const EmbeddingStore& store, const EmbeddingVector& doc_vector);

}  // namespace skillalign
