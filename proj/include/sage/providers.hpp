#pragma once

#include "sage/gateway.hpp"
#include "sage/interaction.hpp"
#include "sage/mock_provider.hpp"
#include "sage/remote_provider.hpp"

namespace sage {

inline Gateway make_gateway(const ProviderBinding& binding) {
    std::shared_ptr<Provider> provider;
    if (binding.kind == ProviderKind::Mock) provider = std::make_shared<MockProvider>(binding);
    else provider = std::make_shared<RemoteProvider>(binding);
    return Gateway(binding, std::move(provider));
}

inline std::string RemoteAdapter::post(const std::string& payload) {
    auto scheme = endpoint_.find("://");
    auto slash = endpoint_.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    std::string host = slash == std::string::npos ? endpoint_ : endpoint_.substr(0, slash);
    std::string path = slash == std::string::npos ? "/" : endpoint_.substr(slash);
    httplib::Client client(host);
    client.set_connection_timeout(60);
    client.set_read_timeout(60);
    auto res = client.Post(path, payload, "application/json");
    if (!res) throw TransportError("no response from agent endpoint " + endpoint_);
    if (res->status != 200)
        throw Error("agent endpoint returned status " + std::to_string(res->status));
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("content"))
        throw Error("malformed agent response body");
    return parsed["content"].get<std::string>();
}

}  // namespace sage
