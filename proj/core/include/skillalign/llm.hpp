// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "skillalign/corpus.hpp"
#include "skillalign/errors.hpp"
#include "skillalign/prompts.hpp"

namespace skillalign {

struct ChatRequest {
    std::string model;
    std::string system_text;
    std::string user_text;
    double temperature = 0.0;  // reproducibility default
    int max_output_tokens = 1024;
};

struct ChatResponse {
    std::string text;
    double latency_ms = 0.0;
    int retry_count = 0;
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string name() const = 0;
    /// Throws ProviderError on failure; transient errors are retryable.
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Deterministic offline chat provider.
///
/// Replays responses from a fixture file of {prompt_sha256, response_text}
/// records. With synthesis enabled, prompts missing from the fixtures get a
/// response derived purely from the prompt's structured sections: extraction
/// prompts are answered with candidate ids ranked by a document/id hash,
/// judge prompts with a hash-derived "Score: N" line. Either way the reply is
/// a pure function of the prompt text, so replays are byte-identical.
class MockChatProvider : public ChatProvider {
public:
    explicit MockChatProvider(bool synthesize = true) : synthesize_(synthesize) {}

    static MockChatProvider from_fixture_file(const std::string& path, bool synthesize = false);

    void add_fixture(std::string_view prompt_sha256, std::string response_text);

    std::string name() const override { return "mock"; }
    ChatResponse complete(const ChatRequest& request) override;

private:
    std::unordered_map<std::string, std::string> fixtures_;
    bool synthesize_;
};

/// OpenAI-compatible chat-completions client (POST {endpoint}/v1/chat/completions).
/// Reads its API key from SKILLALIGN_<NAME>_KEY. HTTP 429/5xx and transport
/// errors are transient; 401/403 are not.
class HttpChatProvider : public ChatProvider {
public:
    HttpChatProvider(std::string name, std::string endpoint, int timeout_seconds = 60);
    std::string name() const override { return name_; }
    ChatResponse complete(const ChatRequest& request) override;

private:
    std::string name_;
    std::string endpoint_;
    int timeout_seconds_;
};

struct RetryPolicy {
    int max_retries = 3;       // retries after the first attempt
    int base_delay_ms = 100;   // doubled per retry, plus jitter
    int max_delay_ms = 2000;
};

/// Per-provider request throttle: bounds in-flight calls and enforces a
/// minimum spacing between dispatches.
class RateLimiter {
public:
    explicit RateLimiter(int max_in_flight = 4, int min_interval_ms = 0);

    class Slot {
    public:
        explicit Slot(RateLimiter& limiter);
        ~Slot();
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;

    private:
        RateLimiter& limiter_;
    };

private:
    friend class Slot;
    void acquire();
    void release();

    std::mutex mutex_;
    std::condition_variable cv_;
    int max_in_flight_;
    int in_flight_ = 0;
    std::chrono::steady_clock::duration min_interval_;
    std::chrono::steady_clock::time_point last_dispatch_;
};

/// Append-only JSONL audit trail of provider calls; single writer behind a
/// mutex.
class AuditLog {
public:
    explicit AuditLog(std::string path) : path_(std::move(path)) {}
    void record(std::string_view provider, std::string_view prompt_sha, std::string_view response_sha,
                double latency_ms, int retry_count);

private:
    std::mutex mutex_;
    std::string path_;
};

/// Calls the provider with exponential backoff plus jitter on transient
/// failures (at most policy.max_retries retries). Authentication and other
/// non-transient errors propagate immediately. Every attempt that produces a
/// response is appended to the audit log when one is supplied.
ChatResponse call_with_retry(ChatProvider& provider, const ChatRequest& request,
                             const RetryPolicy& policy = {}, RateLimiter* limiter = nullptr,
                             AuditLog* audit = nullptr);

/// Model output resolved against the closed vocabulary.
struct ParsedSkillList {
    std::vector<std::string> skill_ids;        // unique, all present in the taxonomy
    std::vector<std::string> unmatched_items;  // raw lines that failed vocabulary matching
};

/// The model produced fewer than k resolvable skills; carries the partial
/// parse so callers can decide whether to re-ask.
class ShortOutputError : public Error {
public:
    ShortOutputError(const std::string& what, ParsedSkillList partial)
        : Error(what), partial_(std::move(partial)) {}
    const ParsedSkillList& partial() const { return partial_; }

private:
    ParsedSkillList partial_;
};

class UnparseableScoreError : public Error {
public:
    using Error::Error;
};

/// Prebuilt matching index over one taxonomy. Resolves each response line
/// with a cascade: exact id, leading id token, exact description
/// (case/whitespace-insensitive), then unique token-set match. Unresolvable
/// lines land in unmatched_items; duplicates keep the first occurrence; the
/// result is truncated to k. parse() throws ShortOutputError when fewer than
/// k skills resolve. Immutable after construction, shareable across workers.
class SkillMatcher {
public:
    explicit SkillMatcher(const SkillTaxonomy& taxonomy);
    ParsedSkillList parse(std::string_view text, std::size_t k) const;

private:
    const SkillTaxonomy* taxonomy_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_description_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_token_set_;
};

/// One-shot convenience wrapper around SkillMatcher.
ParsedSkillList parse_skill_response(std::string_view text, const SkillTaxonomy& taxonomy, std::size_t k);

/// First standalone integer in 1..5 on the final non-empty line, else
/// anywhere in the text. Throws UnparseableScoreError otherwise.
int parse_judge_response(std::string_view text);

}  // namespace skillalign
