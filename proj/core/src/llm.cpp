// SPDX-License-Identifier: Apache-2.0
#include "skillalign/llm.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "skillalign/hash.hpp"
#include "skillalign/lexical.hpp"

namespace skillalign {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Mock provider

MockChatProvider MockChatProvider::from_fixture_file(const std::string& path, bool synthesize) {
    MockChatProvider provider(synthesize);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open mock fixture file: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ConfigError("mock fixtures " + path + ": line " + std::to_string(lineno) + ": " + e.what());
        }
        provider.add_fixture(j.at("prompt_sha256").get<std::string>(),
                             j.at("response_text").get<std::string>());
    }
    return provider;
}

void MockChatProvider::add_fixture(std::string_view prompt_sha256, std::string response_text) {
    fixtures_[std::string(prompt_sha256)] = std::move(response_text);
}

namespace {

// Extracts the body of a "### <heading>" section from our prompt templates.
std::string prompt_section(std::string_view user_text, std::string_view heading) {
    std::string marker = "### " + std::string(heading);
    std::size_t start = user_text.find(marker);
    if (start == std::string_view::npos) return {};
    start = user_text.find('\n', start);
    if (start == std::string_view::npos) return {};
    ++start;
    std::size_t end = user_text.find("\n### ", start);
    if (end == std::string_view::npos) end = user_text.size();
    return std::string(user_text.substr(start, end - start));
}

std::vector<std::string> section_ids(const std::string& section) {
    std::vector<std::string> ids;
    std::istringstream ss(section);
    std::string line;
    while (std::getline(ss, line)) {
        auto colon = line.find(": ");
        if (colon == std::string::npos || colon == 0) continue;
        ids.push_back(line.substr(0, colon));
    }
    return ids;
}

std::optional<std::size_t> requested_count(std::string_view user_text) {
    std::size_t pos = user_text.find("exactly ");
    if (pos == std::string_view::npos) return std::nullopt;
    pos += 8;
    std::size_t end = pos;
    while (end < user_text.size() && std::isdigit(static_cast<unsigned char>(user_text[end]))) ++end;
    if (end == pos) return std::nullopt;
    return std::stoul(std::string(user_text.substr(pos, end - pos)));
}

}  // namespace

ChatResponse MockChatProvider::complete(const ChatRequest& request) {
    std::string sha = sha256_hex(request.system_text + "\n---\n" + request.user_text);
    ChatResponse response;
    response.prompt_tokens = static_cast<int>((request.system_text.size() + request.user_text.size()) / 4);

    if (auto it = fixtures_.find(sha); it != fixtures_.end()) {
        response.text = it->second;
        response.completion_tokens = static_cast<int>(response.text.size() / 4);
        return response;
    }
    if (!synthesize_)
        throw ProviderError("mock provider: no fixture for prompt " + sha, false);

    const std::string doc = prompt_section(request.user_text, "Document");
    std::string skill = prompt_section(request.user_text, "Skill\n");
    if (skill.empty()) skill = prompt_section(request.user_text, "Skill");

    std::string pool = prompt_section(request.user_text, "Candidate skills");
    if (pool.empty()) pool = prompt_section(request.user_text, "Skill vocabulary");

    if (!pool.empty()) {
        // Extraction prompt: rank the listed ids by a (document, id, model) hash.
        auto ids = section_ids(pool);
        auto k = requested_count(request.user_text);
        if (ids.empty() || !k)
            throw ProviderError("mock provider: unrecognized extraction prompt " + sha, false);
        std::stable_sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
            return fnv1a64(doc + '\x1f' + a + '\x1f' + request.model) <
                   fnv1a64(doc + '\x1f' + b + '\x1f' + request.model);
        });
        std::string text;
        std::size_t n = std::min(*k, ids.size());
        for (std::size_t i = 0; i < n; ++i)
            text += std::to_string(i + 1) + ". " + ids[i] + "\n";
        response.text = std::move(text);
    } else if (!skill.empty()) {
        // Judge prompt: derive a stable 1..5 score from (document, skill, model).
        int score = 1 + static_cast<int>(fnv1a64(doc + '\x1f' + skill + '\x1f' + request.model) % 5);
        response.text = "Alignment assessed against the rubric.\nScore: " + std::to_string(score);
    } else {
        throw ProviderError("mock provider: no fixture for prompt " + sha + " and prompt not synthesizable",
                            false);
    }
    response.completion_tokens = static_cast<int>(response.text.size() / 4);
    return response;
}

// ---------------------------------------------------------------------------
// HTTP provider (transport lives in http.cpp)

ChatResponse http_post_chat(const std::string& endpoint, const std::string& provider,
                            const std::string& payload, int timeout_seconds);

HttpChatProvider::HttpChatProvider(std::string name, std::string endpoint, int timeout_seconds)
    : name_(std::move(name)), endpoint_(std::move(endpoint)), timeout_seconds_(timeout_seconds) {}

ChatResponse HttpChatProvider::complete(const ChatRequest& request) {
    json body = {
        {"model", request.model},
        {"messages",
         {{{"role", "system"}, {"content", request.system_text}},
          {{"role", "user"}, {"content", request.user_text}}}},
        {"temperature", request.temperature},
        {"max_tokens", request.max_output_tokens},
    };
    return http_post_chat(endpoint_, name_, body.dump(), timeout_seconds_);
}

// ---------------------------------------------------------------------------
// Retry, rate limiting, audit

RateLimiter::RateLimiter(int max_in_flight, int min_interval_ms)
    : max_in_flight_(max_in_flight > 0 ? max_in_flight : 1),
      min_interval_(std::chrono::milliseconds(min_interval_ms)),
      last_dispatch_(std::chrono::steady_clock::now() - min_interval_) {}

void RateLimiter::acquire() {
    std::chrono::steady_clock::time_point slot;
    {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
        ++in_flight_;
        // reserve the dispatch slot while holding the lock so concurrent
        // callers are spaced by min_interval even if they sleep in parallel
        auto now = std::chrono::steady_clock::now();
        slot = std::max(now, last_dispatch_ + min_interval_);
        last_dispatch_ = slot;
    }
    std::this_thread::sleep_until(slot);
}

void RateLimiter::release() {
    {
        std::lock_guard lock(mutex_);
        --in_flight_;
    }
    cv_.notify_one();
}

RateLimiter::Slot::Slot(RateLimiter& limiter) : limiter_(limiter) { limiter_.acquire(); }
RateLimiter::Slot::~Slot() { limiter_.release(); }

void AuditLog::record(std::string_view provider, std::string_view prompt_sha,
                      std::string_view response_sha, double latency_ms, int retry_count) {
    json j;
    j["timestamp"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    j["provider"] = std::string(provider);
    j["prompt_sha256"] = std::string(prompt_sha);
    j["response_sha256"] = std::string(response_sha);
    j["latency_ms"] = latency_ms;
    j["retry_count"] = retry_count;
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (out) out << j.dump() << '\n';
}

ChatResponse call_with_retry(ChatProvider& provider, const ChatRequest& request,
                             const RetryPolicy& policy, RateLimiter* limiter, AuditLog* audit) {
    std::string prompt_sha = sha256_hex(request.system_text + "\n---\n" + request.user_text);
    thread_local std::mt19937_64 jitter_rng(std::random_device{}());

    int attempt = 0;
    for (;;) {
        auto start = std::chrono::steady_clock::now();
        try {
            ChatResponse response;
            {
                std::optional<RateLimiter::Slot> slot;
                if (limiter) slot.emplace(*limiter);
                response = provider.complete(request);
            }
            auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
            response.latency_ms = elapsed.count();
            response.retry_count = attempt;
            if (audit)
                audit->record(provider.name(), prompt_sha, sha256_hex(response.text), response.latency_ms,
                              attempt);
            return response;
        } catch (const ProviderError& e) {
            auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
            if (audit)
                audit->record(provider.name(), prompt_sha, std::string("error:") + e.what(), elapsed.count(),
                              attempt);
            if (!e.transient() || attempt >= policy.max_retries) throw;
            int delay = std::min(policy.max_delay_ms, policy.base_delay_ms * (1 << attempt));
            delay += static_cast<int>(jitter_rng() % static_cast<std::uint64_t>(std::max(1, delay / 2 + 1)));
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
            ++attempt;
        }
    }
}

// ---------------------------------------------------------------------------
// Response parsing

namespace {

std::string strip_list_marker(std::string_view line) {
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    };
    skip_ws();
    std::size_t digits_start = i;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > digits_start && i < line.size() && (line[i] == '.' || line[i] == ')')) {
        ++i;
    } else {
        i = digits_start;
        if (i < line.size() && (line[i] == '-' || line[i] == '*')) ++i;
    }
    skip_ws();
    std::size_t end = line.size();
    while (end > i && std::isspace(static_cast<unsigned char>(line[end - 1]))) --end;
    return std::string(line.substr(i, end - i));
}

std::string normalize_ws(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out += ' ';
            pending_space = false;
            out += static_cast<char>(std::tolower(c));
        }
    }
    return out;
}

std::string token_set_key(std::string_view text) {
    auto tokens = tokenize(text);
    std::set<std::string> distinct(tokens.begin(), tokens.end());
    std::string key;
    for (const auto& t : distinct) {
        key += t;
        key += '\x1f';
    }
    return key;
}

}  // namespace

SkillMatcher::SkillMatcher(const SkillTaxonomy& taxonomy) : taxonomy_(&taxonomy) {
    // only unique description/token-set keys are resolvable
    for (std::size_t i = 0; i < taxonomy.size(); ++i) {
        const Skill& s = taxonomy.skills()[i];
        by_description_[normalize_ws(s.description)].push_back(i);
        by_token_set_[token_set_key(s.description)].push_back(i);
    }
}

ParsedSkillList SkillMatcher::parse(std::string_view text, std::size_t k) const {
    const SkillTaxonomy& taxonomy = *taxonomy_;
    ParsedSkillList result;
    std::set<std::string> seen;
    auto add = [&](const std::string& id) {
        if (seen.insert(id).second) result.skill_ids.push_back(id);
    };

    std::istringstream ss{std::string(text)};
    std::string raw_line;
    while (std::getline(ss, raw_line)) {
        std::string line = strip_list_marker(raw_line);
        if (line.empty()) continue;

        if (taxonomy.find(line)) {
            add(line);
            continue;
        }
        // leading id followed by ':' or whitespace, e.g. "S123: Analyze data"
        std::size_t sep = line.find_first_of(": \t");
        if (sep != std::string::npos && taxonomy.find(line.substr(0, sep))) {
            add(line.substr(0, sep));
            continue;
        }
        if (auto it = by_description_.find(normalize_ws(line));
            it != by_description_.end() && it->second.size() == 1) {
            add(taxonomy.skills()[it->second.front()].id);
            continue;
        }
        if (auto it = by_token_set_.find(token_set_key(line));
            it != by_token_set_.end() && it->second.size() == 1 && !tokenize(line).empty()) {
            add(taxonomy.skills()[it->second.front()].id);
            continue;
        }
        result.unmatched_items.push_back(line);
    }

    if (result.skill_ids.size() > k) result.skill_ids.resize(k);
    if (result.skill_ids.size() < k) {
        std::string what = "short output: matched " + std::to_string(result.skill_ids.size()) + " of " +
                           std::to_string(k) + " requested skills (" +
                           std::to_string(result.unmatched_items.size()) + " unmatched items)";
        throw ShortOutputError(what, std::move(result));
    }
    return result;
}

ParsedSkillList parse_skill_response(std::string_view text, const SkillTaxonomy& taxonomy, std::size_t k) {
    return SkillMatcher(taxonomy).parse(text, k);
}

namespace {

std::optional<int> find_rubric_score(std::string_view line) {
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(line[i]))) continue;
        std::size_t end = i;
        while (end < line.size() && std::isdigit(static_cast<unsigned char>(line[end]))) ++end;
        bool ok = (end - i) == 1;
        if (ok && i > 0) {
            unsigned char prev = line[i - 1];
            if (std::isalnum(prev)) ok = false;
            // part of a decimal like "4.5" or ".5"
            if (prev == '.' && i >= 2 && std::isdigit(static_cast<unsigned char>(line[i - 2]))) ok = false;
        }
        if (ok && end < line.size()) {
            unsigned char next = line[end];
            if (std::isalnum(next)) ok = false;
            if (next == '.' && end + 1 < line.size() &&
                std::isdigit(static_cast<unsigned char>(line[end + 1])))
                ok = false;
        }
        if (ok) {
            int value = line[i] - '0';
            if (value >= 1 && value <= 5) return value;
        }
        i = end;
    }
    return std::nullopt;
}

}  // namespace

int parse_judge_response(std::string_view text) {
    // final non-empty line first
    std::size_t end = text.size();
    while (end > 0) {
        std::size_t start = text.rfind('\n', end - 1);
        std::size_t line_start = (start == std::string_view::npos) ? 0 : start + 1;
        std::string_view line = text.substr(line_start, end - line_start);
        bool blank = line.find_first_not_of(" \t\r") == std::string_view::npos;
        if (!blank) {
            if (auto score = find_rubric_score(line)) return *score;
            break;
        }
        if (start == std::string_view::npos) break;
        end = start;
    }
    if (auto score = find_rubric_score(text)) return *score;
    throw UnparseableScoreError("no standalone integer score in 1..5 found in judge response");
}

}  // namespace skillalign
