// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "skillalign/embedding.hpp"
#include "skillalign/llm.hpp"

namespace skillalign {

/// Owns the configured chat/embedding providers and one rate limiter per
/// chat provider. Loaded from a JSON config file:
///
///   {"chat": [{"name": "mock", "kind": "mock", "synthesize": true}, ...],
///    "embedding": [{"name": "mock", "kind": "mock", "dim": 8}, ...]}
///
/// kind "openai_compat" entries take endpoint (+ model/dim for embeddings)
/// and optional max_in_flight / min_interval_ms / timeout_seconds. API keys
/// come only from SKILLALIGN_<NAME>_KEY.
class ProviderSet {
public:
    /// Registry with just the mock providers (synthesizing chat, dim-8 embeddings).
    static ProviderSet mocks();
    static ProviderSet load(const std::string& config_path);

    ChatProvider& chat(const std::string& name);
    RateLimiter* limiter(const std::string& name);
    EmbeddingProvider& embedding(const std::string& name);

private:
    struct ChatEntry {
        std::unique_ptr<ChatProvider> provider;
        std::unique_ptr<RateLimiter> limiter;
    };
    std::unordered_map<std::string, ChatEntry> chat_;
    std::unordered_map<std::string, std::unique_ptr<EmbeddingProvider>> embedding_;
};

}  // namespace skillalign
