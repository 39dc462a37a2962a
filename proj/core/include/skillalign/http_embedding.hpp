// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "skillalign/embedding.hpp"

namespace skillalign {

/// OpenAI-compatible embeddings client (POST {endpoint}/v1/embeddings).
/// Reads its API key from SKILLALIGN_<NAME>_KEY.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(std::string name, std::string endpoint, std::string model, std::size_t dim,
                          int timeout_seconds = 60);

    std::string name() const override { return name_; }
    std::size_t dim() const override { return dim_; }
    std::string fingerprint() const override;
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

private:
    std::string name_;
    std::string endpoint_;
    std::string model_;
    std::size_t dim_;
    int timeout_seconds_;
};

}  // namespace skillalign
