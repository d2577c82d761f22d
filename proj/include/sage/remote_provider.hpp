#pragma once

#include <string>

#include <httplib.h>

#include "sage/gateway.hpp"

namespace sage {

// Speaks the common chat-completion wire protocol:
//   POST <endpoint>  {model, messages:[{role, content}], temperature, max_tokens}
//   ->               {choices:[{message:{content}}]}
// The credential is read from the named environment variable at call time and
// is never stored in any artifact.
class RemoteProvider : public Provider {
public:
    explicit RemoteProvider(const ProviderBinding& binding)
        : endpoint_(binding.endpoint), credential_env_(binding.credential_env) {
        if (endpoint_.empty()) throw PreconditionError("remote binding needs an endpoint");
    }

    std::string complete(const CompletionRequest& request) override {
        const char* key = credential_env_.empty() ? nullptr : std::getenv(credential_env_.c_str());
        if (!credential_env_.empty() && (!key || !*key))
            throw CredentialError("credential env var '" + credential_env_ + "' is not set");

        json body;
        body["model"] = request.model_id;
        body["temperature"] = request.temperature;
        body["max_tokens"] = request.max_output_tokens;
        body["messages"] = json::array();
        for (const auto& m : request.messages)
            body["messages"].push_back({{"role", role_name(m.role)}, {"content", m.content}});

        auto [host, path] = split_endpoint(endpoint_);
        httplib::Client client(host);
        client.set_connection_timeout(10);
        client.set_read_timeout(120);
        httplib::Headers headers;
        if (key) headers.emplace("Authorization", std::string("Bearer ") + key);

        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (!res) throw TransportError("no response from " + endpoint_);
        if (res->status == 429 || res->status >= 500)
            throw TransportError("provider returned status " + std::to_string(res->status));
        if (res->status != 200)
            throw GatewayError("provider refused request, status " + std::to_string(res->status) +
                               ": " + res->body);
        json parsed = json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty())
            throw GatewayError("malformed provider response body");
        return parsed["choices"][0]["message"]["content"].get<std::string>();
    }

private:
    // "http://host:port/v1/chat/completions" -> {"http://host:port", "/v1/..."}
    static std::pair<std::string, std::string> split_endpoint(const std::string& url) {
        auto scheme = url.find("://");
        auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
        if (slash == std::string::npos) return {url, "/"};
        return {url.substr(0, slash), url.substr(slash)};
    }

    std::string endpoint_;
    std::string credential_env_;
};

}  // namespace sage
