#pragma once

#include <chrono>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sage/util.hpp"

namespace sage {

using json = nlohmann::json;

enum class Role { System, User, Assistant };

inline std::string role_name(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

struct ChatMessage {
    Role role = Role::User;
    std::string content;
};

struct CompletionRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    std::string model_id = "default";

    void check() const {
        if (messages.empty()) throw PreconditionError("request has no messages");
        if (temperature < 0.0 || temperature > 2.0)
            throw PreconditionError("temperature out of [0,2]");
        if (max_output_tokens <= 0) throw PreconditionError("max_output_tokens must be positive");
        for (std::size_t i = 0; i < messages.size(); ++i) {
            if (messages[i].role == Role::System) {
                if (i != 0) throw PreconditionError("system message must be first");
            }
            if (messages[i].role != Role::Assistant && messages[i].content.empty())
                throw PreconditionError("empty content in system/user message");
        }
    }
};

// Per-role decoding defaults from the run config; applied when pipeline code
// assembles requests.
struct RequestOptions {
    std::string model_id = "default";
    double temperature = 0.7;
    int max_output_tokens = 1024;

    CompletionRequest request(std::vector<ChatMessage> messages) const {
        CompletionRequest req;
        req.messages = std::move(messages);
        req.temperature = temperature;
        req.max_output_tokens = max_output_tokens;
        req.model_id = model_id;
        return req;
    }
};

// Stable fingerprint of a request's message content; the replay table and the
// hash-deterministic mock both key on this.
inline std::uint64_t request_fingerprint(const CompletionRequest& req) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& m : req.messages) {
        h = fnv1a64(role_name(m.role), h);
        h = fnv1a64(":", h);
        h = fnv1a64(m.content, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

enum class ProviderKind { Remote, Mock };

struct ProviderBinding {
    ProviderKind kind = ProviderKind::Mock;
    // remote
    std::string endpoint;
    std::string credential_env;
    // mock
    std::uint64_t seed = 0;
    std::string script_path;  // optional scripted-replay table / rules
};

class GatewayError : public Error {
public:
    explicit GatewayError(const std::string& what) : Error(what) {}
};

class CredentialError : public GatewayError {
public:
    explicit CredentialError(const std::string& what) : GatewayError(what) {}
};

class TransportError : public GatewayError {
public:
    explicit TransportError(const std::string& what) : GatewayError(what) {}
};

// Raised when structured parsing never produced a conforming value.
class ExhaustedRetriesError : public GatewayError {
public:
    ExhaustedRetriesError(const std::string& what, std::string last_raw)
        : GatewayError(what), last_raw_text(std::move(last_raw)) {}
    std::string last_raw_text;
};

struct FieldSpec {
    enum class Kind { String, Integer, Number, Array, Object };
    Kind kind = Kind::String;
    bool required = true;
    std::optional<long> min_value;
    std::optional<long> max_value;
    std::vector<std::string> one_of;        // strings only
    std::vector<std::string> item_keys;     // arrays of objects: required keys per item
};

struct StructureSchema {
    std::map<std::string, FieldSpec> fields;

    // Returns an empty string when the value conforms, else a description of
    // the first violation (fed back to the model on retry).
    std::string validate(const json& v) const {
        if (!v.is_object()) return "expected a JSON object";
        for (const auto& [name, spec] : fields) {
            if (!v.contains(name)) {
                if (spec.required) return "missing required field '" + name + "'";
                continue;
            }
            const json& f = v.at(name);
            switch (spec.kind) {
                case FieldSpec::Kind::String: {
                    if (!f.is_string()) return "field '" + name + "' must be a string";
                    const auto s = f.get<std::string>();
                    if (s.empty()) return "field '" + name + "' must be non-empty";
                    if (!spec.one_of.empty() &&
                        std::find(spec.one_of.begin(), spec.one_of.end(), s) == spec.one_of.end())
                        return "field '" + name + "' must be one of the allowed values";
                    break;
                }
                case FieldSpec::Kind::Integer: {
                    if (!f.is_number_integer()) return "field '" + name + "' must be an integer";
                    long x = f.get<long>();
                    if (spec.min_value && x < *spec.min_value)
                        return "field '" + name + "' below minimum " + std::to_string(*spec.min_value);
                    if (spec.max_value && x > *spec.max_value)
                        return "field '" + name + "' above maximum " + std::to_string(*spec.max_value);
                    break;
                }
                case FieldSpec::Kind::Number:
                    if (!f.is_number()) return "field '" + name + "' must be a number";
                    break;
                case FieldSpec::Kind::Array: {
                    if (!f.is_array()) return "field '" + name + "' must be an array";
                    for (const auto& item : f) {
                        if (spec.item_keys.empty()) continue;
                        if (!item.is_object()) return "items of '" + name + "' must be objects";
                        for (const auto& k : spec.item_keys)
                            if (!item.contains(k))
                                return "items of '" + name + "' must contain '" + k + "'";
                    }
                    break;
                }
                case FieldSpec::Kind::Object:
                    if (!f.is_object()) return "field '" + name + "' must be an object";
                    break;
            }
        }
        return {};
    }
};

// Pulls the first balanced {...} out of model text, tolerating code fences
// and prose around the JSON.
inline std::optional<json> extract_json_object(const std::string& text) {
    std::size_t start = text.find('{');
    while (start != std::string::npos) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}') {
                if (--depth == 0) {
                    auto candidate = text.substr(start, i - start + 1);
                    json parsed = json::parse(candidate, nullptr, false);
                    if (!parsed.is_discarded()) return parsed;
                    break;
                }
            }
        }
        start = text.find('{', start + 1);
    }
    return std::nullopt;
}

class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string complete(const CompletionRequest& request) = 0;
};

// Immutable after construction; safe to share across threads.
class Gateway {
public:
    Gateway(ProviderBinding binding, std::shared_ptr<Provider> provider)
        : binding_(std::move(binding)), provider_(std::move(provider)) {
        if (!provider_) throw PreconditionError("gateway needs a provider");
    }

    const ProviderBinding& binding() const { return binding_; }

    std::string complete(const CompletionRequest& request) const {
        request.check();
        const int max_attempts = 3;
        std::chrono::milliseconds backoff(250);
        for (int attempt = 1;; ++attempt) {
            try {
                return provider_->complete(request);
            } catch (const TransportError&) {
                if (attempt >= max_attempts) throw;
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
            }
        }
    }

    // Ask, parse, validate; on failure feed the validation error back as a new
    // user turn and re-ask.  Three attempts total, then a typed error carrying
    // the last raw text.
    json complete_structured(const CompletionRequest& request, const StructureSchema& schema) const {
        request.check();
        CompletionRequest work = request;
        std::string last_raw;
        const int max_attempts = 3;
        for (int attempt = 1; attempt <= max_attempts; ++attempt) {
            last_raw = complete(work);
            std::string problem;
            auto parsed = extract_json_object(last_raw);
            if (!parsed) {
                problem = "response did not contain a parseable JSON object";
            } else {
                problem = schema.validate(*parsed);
                if (problem.empty()) return *parsed;
            }
            if (attempt < max_attempts) {
                work.messages.push_back({Role::Assistant, last_raw});
                work.messages.push_back(
                    {Role::User, "Your previous reply was invalid: " + problem +
                                     ". Reply again with only the JSON object."});
            }
        }
        throw ExhaustedRetriesError("structured output failed after " +
                                        std::to_string(max_attempts) + " attempts",
                                    last_raw);
    }

private:
    ProviderBinding binding_;
    std::shared_ptr<Provider> provider_;
};

}  // namespace sage
