// SPDX-License-Identifier: Apache-2.0
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "skillalign/embedding.hpp"
#include "skillalign/errors.hpp"
#include "skillalign/http_embedding.hpp"
#include "skillalign/llm.hpp"

namespace skillalign {

using nlohmann::json;

namespace {

std::string env_api_key(const std::string& provider_name) {
    std::string var = "SKILLALIGN_";
    for (char c : provider_name) var += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    var += "_KEY";
    const char* value = std::getenv(var.c_str());
    return value ? value : "";
}

httplib::Headers auth_headers(const std::string& provider_name) {
    httplib::Headers headers;
    std::string key = env_api_key(provider_name);
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
    return headers;
}

// 429 and 5xx are worth retrying; auth failures and other 4xx are not.
void throw_for_status(const std::string& provider, int status, const std::string& body) {
    bool transient = status == 429 || status >= 500;
    if (status == 401 || status == 403)
        throw ProviderError(provider + ": authentication failed (HTTP " + std::to_string(status) + ")", false);
    throw ProviderError(provider + ": HTTP " + std::to_string(status) + " " + body.substr(0, 200), transient);
}

}  // namespace

ChatResponse http_post_chat(const std::string& endpoint, const std::string& provider,
                            const std::string& payload, int timeout_seconds) {
    httplib::Client client(endpoint);
    client.set_connection_timeout(timeout_seconds);
    client.set_read_timeout(timeout_seconds);
    auto res = client.Post("/v1/chat/completions", auth_headers(provider), payload, "application/json");
    if (!res) {
        throw ProviderError(provider + ": transport error (" + httplib::to_string(res.error()) + ")", true);
    }
    if (res->status != 200) throw_for_status(provider, res->status, res->body);
    try {
        json j = json::parse(res->body);
        ChatResponse response;
        response.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage")) {
            response.prompt_tokens = j["usage"].value("prompt_tokens", 0);
            response.completion_tokens = j["usage"].value("completion_tokens", 0);
        }
        return response;
    } catch (const json::exception& e) {
        throw ProviderError(provider + ": malformed reply: " + e.what(), false);
    }
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string name, std::string endpoint, std::string model,
                                             std::size_t dim, int timeout_seconds)
    : name_(std::move(name)),
      endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      dim_(dim),
      timeout_seconds_(timeout_seconds) {
    if (dim_ == 0) throw ConfigError("http embedding provider " + name_ + ": dim must be configured");
}

std::string HttpEmbeddingProvider::fingerprint() const {
    return model_ + ":" + std::to_string(dim_);
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    json body = {{"model", model_}, {"input", texts}};
    httplib::Client client(endpoint_);
    client.set_connection_timeout(timeout_seconds_);
    client.set_read_timeout(timeout_seconds_);
    auto res = client.Post("/v1/embeddings", auth_headers(name_), body.dump(), "application/json");
    if (!res) {
        throw ProviderError(name_ + ": transport error (" + httplib::to_string(res.error()) + ")", true);
    }
    if (res->status != 200) throw_for_status(name_, res->status, res->body);
    try {
        json j = json::parse(res->body);
        std::vector<EmbeddingVector> out;
        for (const auto& item : j.at("data")) out.push_back(item.at("embedding").get<EmbeddingVector>());
        return out;
    } catch (const json::exception& e) {
        throw ProviderError(name_ + ": malformed reply: " + e.what(), false);
    }
}

}  // namespace skillalign
