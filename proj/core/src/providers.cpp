// SPDX-License-Identifier: Apache-2.0
#include "skillalign/providers.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "skillalign/errors.hpp"
#include "skillalign/http_embedding.hpp"

namespace skillalign {

using nlohmann::json;

ProviderSet ProviderSet::mocks() {
    ProviderSet set;
    ChatEntry entry;
    entry.provider = std::make_unique<MockChatProvider>(true);
    entry.limiter = std::make_unique<RateLimiter>(8, 0);
    set.chat_.emplace("mock", std::move(entry));
    set.embedding_.emplace("mock", std::make_unique<MockEmbeddingProvider>(8));
    return set;
}

ProviderSet ProviderSet::load(const std::string& config_path) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw ConfigError("cannot open provider config: " + config_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("provider config " + config_path + ": " + e.what());
    }
    auto base_dir = std::filesystem::path(config_path).parent_path();

    ProviderSet set;
    for (const auto& entry : j.value("chat", json::array())) {
        std::string name = entry.at("name").get<std::string>();
        std::string kind = entry.value("kind", "mock");
        ChatEntry chat;
        if (kind == "mock") {
            bool synthesize = entry.value("synthesize", true);
            std::string fixtures = entry.value("fixtures", "");
            if (!fixtures.empty()) {
                auto path = std::filesystem::path(fixtures);
                if (path.is_relative()) path = base_dir / path;
                chat.provider = std::make_unique<MockChatProvider>(
                    MockChatProvider::from_fixture_file(path.string(), synthesize));
            } else {
                chat.provider = std::make_unique<MockChatProvider>(synthesize);
            }
        } else if (kind == "openai_compat") {
            chat.provider = std::make_unique<HttpChatProvider>(name, entry.at("endpoint").get<std::string>(),
                                                               entry.value("timeout_seconds", 60));
        } else {
            throw ConfigError("provider config: unknown chat provider kind '" + kind + "'");
        }
        chat.limiter = std::make_unique<RateLimiter>(entry.value("max_in_flight", 4),
                                                     entry.value("min_interval_ms", 0));
        if (!set.chat_.emplace(name, std::move(chat)).second)
            throw ConfigError("provider config: duplicate chat provider '" + name + "'");
    }
    for (const auto& entry : j.value("embedding", json::array())) {
        std::string name = entry.at("name").get<std::string>();
        std::string kind = entry.value("kind", "mock");
        std::unique_ptr<EmbeddingProvider> provider;
        if (kind == "mock") {
            provider = std::make_unique<MockEmbeddingProvider>(entry.value("dim", std::size_t{8}));
        } else if (kind == "openai_compat") {
            provider = std::make_unique<HttpEmbeddingProvider>(
                name, entry.at("endpoint").get<std::string>(), entry.at("model").get<std::string>(),
                entry.at("dim").get<std::size_t>(), entry.value("timeout_seconds", 60));
        } else {
            throw ConfigError("provider config: unknown embedding provider kind '" + kind + "'");
        }
        if (!set.embedding_.emplace(name, std::move(provider)).second)
            throw ConfigError("provider config: duplicate embedding provider '" + name + "'");
    }
    // mocks are always reachable
    if (!set.chat_.count("mock")) {
        ChatEntry entry;
        entry.provider = std::make_unique<MockChatProvider>(true);
        entry.limiter = std::make_unique<RateLimiter>(8, 0);
        set.chat_.emplace("mock", std::move(entry));
    }
    if (!set.embedding_.count("mock"))
        set.embedding_.emplace("mock", std::make_unique<MockEmbeddingProvider>(8));
    return set;
}

ChatProvider& ProviderSet::chat(const std::string& name) {
    auto it = chat_.find(name);
    if (it == chat_.end()) throw ConfigError("unknown chat provider '" + name + "'");
    return *it->second.provider;
}

RateLimiter* ProviderSet::limiter(const std::string& name) {
    auto it = chat_.find(name);
    if (it == chat_.end()) return nullptr;
    return it->second.limiter.get();
}

EmbeddingProvider& ProviderSet::embedding(const std::string& name) {
    auto it = embedding_.find(name);
    if (it == embedding_.end()) throw ConfigError("unknown embedding provider '" + name + "'");
    return *it->second;
}

}  // namespace skillalign
