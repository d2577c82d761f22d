#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sage/gateway.hpp"
#include "sage/knowledge.hpp"
#include "sage/lexdiv.hpp"

namespace sage {

enum class Ablation { Full, NoIcp, NoAgentInfra };

inline std::string ablation_name(Ablation a) {
    switch (a) {
        case Ablation::Full: return "full";
        case Ablation::NoIcp: return "no_icp";
        case Ablation::NoAgentInfra: return "no_agent_infra";
    }
    return "full";
}

inline Ablation ablation_from_name(const std::string& name) {
    if (name == "full") return Ablation::Full;
    if (name == "no_icp") return Ablation::NoIcp;
    if (name == "no_agent_infra") return Ablation::NoAgentInfra;
    throw Error("unknown ablation: " + name);
}

struct ProviderRole {
    ProviderBinding binding;
    RequestOptions options;
};

struct AdapterConfig {
    std::string kind = "echo";  // echo | faq_lookup | flaky | remote
    double flaky_p = 0.5;
    std::uint64_t seed = 1;
    std::string planted_fact = "It takes approximately 3 hours to fully charge from 0 to 100%.";
    std::string endpoint;
};

struct MiningConfig {
    int runs = 5;
    std::size_t batch_size = 50;
};

struct RunConfig {
    std::string company_name;
    std::string corporate_summary;
    BusinessMode attribute_mode = BusinessMode::B2B;
    Ablation ablation = Ablation::Full;
    std::vector<KnowledgeSource> knowledge_sources;
    std::vector<CapabilitySpec> capabilities;
    ProviderRole simulator, judge, miner;
    AdapterConfig adapter;
    std::uint64_t seed = 0;
    int budget = 10;
    int workers = 1;
    int judge_threshold = 2;
    int resample_budget = 5;
    MiningConfig mining;
    DiversityParams diversity;
    std::size_t doc_chunk_tokens = 512;
    std::size_t embedding_dim = 256;
    std::string extra_world_knowledge;

    std::string snapshot;  // raw config file bytes, frozen into the run directory
};

namespace detail {

inline CapabilityStage stage_from_name(const std::string& name) {
    for (auto s : {CapabilityStage::NeedRecognition, CapabilityStage::InformationSearch,
                   CapabilityStage::EvaluationOfAlternatives, CapabilityStage::PurchaseDecision,
                   CapabilityStage::PostPurchase, CapabilityStage::Custom})
        if (stage_name(s) == name) return s;
    throw Error("unknown capability stage: " + name);
}

inline SourceFormat format_from_name(const std::string& name) {
    if (name == "faq") return SourceFormat::Faq;
    if (name == "table") return SourceFormat::Table;
    if (name == "doc") return SourceFormat::Doc;
    throw Error("unknown knowledge format: " + name);
}

inline ProviderRole parse_role(const json& j, const std::filesystem::path& base) {
    ProviderRole role;
    const json& b = j.at("binding");
    const auto kind = b.value("kind", std::string("mock"));
    if (kind == "mock") {
        role.binding.kind = ProviderKind::Mock;
        role.binding.seed = b.value("seed", 0ULL);
        if (b.contains("script"))
            role.binding.script_path = (base / b.at("script").get<std::string>()).string();
    } else if (kind == "remote") {
        role.binding.kind = ProviderKind::Remote;
        role.binding.endpoint = b.at("endpoint").get<std::string>();
        role.binding.credential_env = b.value("credential_env", std::string());
    } else {
        throw Error("unknown provider kind: " + kind);
    }
    role.options.model_id = j.value("model_id", std::string("default"));
    role.options.temperature = j.value("temperature", 0.7);
    role.options.max_output_tokens = j.value("max_output_tokens", 1024);
    return role;
}

}  // namespace detail

// Parses without throwing; every problem becomes one diagnostic line.
inline std::vector<std::string> validate_config_json(const json& j,
                                                     const std::filesystem::path& base) {
    std::vector<std::string> diags;
    auto need = [&](const char* key) {
        if (!j.contains(key)) diags.push_back(std::string("missing required key '") + key + "'");
        return j.contains(key);
    };
    if (need("company")) {
        if (!j["company"].contains("name") || j["company"]["name"].get<std::string>().empty())
            diags.push_back("company.name must be a non-empty string");
        if (!j["company"].contains("summary") || j["company"]["summary"].get<std::string>().empty())
            diags.push_back("company.summary must be a non-empty string");
    }
    if (need("attribute_mode")) {
        auto m = j["attribute_mode"].get<std::string>();
        if (m != "B2B" && m != "B2C") diags.push_back("attribute_mode must be B2B or B2C");
    }
    if (j.contains("ablation")) {
        try {
            ablation_from_name(j["ablation"].get<std::string>());
        } catch (const std::exception& e) {
            diags.push_back(e.what());
        }
    }
    const bool no_infra =
        j.value("ablation", std::string("full")) == std::string("no_agent_infra");
    if (!no_infra && need("knowledge_sources")) {
        if (!j["knowledge_sources"].is_array() || j["knowledge_sources"].empty())
            diags.push_back("knowledge_sources must be a non-empty array");
        else
            for (const auto& src : j["knowledge_sources"]) {
                if (!src.contains("path") || !src.contains("category") || !src.contains("format")) {
                    diags.push_back("knowledge source needs path, category and format");
                    continue;
                }
                auto p = base / src["path"].get<std::string>();
                if (!std::filesystem::exists(p))
                    diags.push_back("knowledge source path does not exist: " + p.string());
                try {
                    detail::format_from_name(src["format"].get<std::string>());
                } catch (const std::exception& e) {
                    diags.push_back(e.what());
                }
            }
    }
    if (need("capabilities")) {
        if (!j["capabilities"].is_array() || j["capabilities"].empty())
            diags.push_back("capabilities must be a non-empty array");
        else
            for (const auto& c : j["capabilities"]) {
                if (!c.contains("statement") || c["statement"].get<std::string>().empty())
                    diags.push_back("capability without a statement");
                if (c.contains("stage")) {
                    try {
                        detail::stage_from_name(c["stage"].get<std::string>());
                    } catch (const std::exception& e) {
                        diags.push_back(e.what());
                    }
                }
            }
    }
    if (need("providers")) {
        for (const char* role : {"simulator", "judge", "miner"}) {
            if (!j["providers"].contains(role)) {
                diags.push_back(std::string("providers.") + role + " is missing");
                continue;
            }
            try {
                detail::parse_role(j["providers"][role], base);
            } catch (const std::exception& e) {
                diags.push_back(std::string("providers.") + role + ": " + e.what());
            }
        }
    }
    if (j.contains("adapter")) {
        auto kind = j["adapter"].value("kind", std::string("echo"));
        if (kind != "echo" && kind != "faq_lookup" && kind != "flaky" && kind != "remote")
            diags.push_back("adapter.kind must be echo, faq_lookup, flaky or remote");
        if (kind == "remote" && !j["adapter"].contains("endpoint"))
            diags.push_back("remote adapter needs an endpoint");
        double p = j["adapter"].value("p", 0.5);
        if (p < 0.0 || p > 1.0) diags.push_back("adapter.p must be in [0,1]");
    }
    if (j.value("budget", 10) < 1) diags.push_back("budget must be >= 1");
    if (j.value("workers", 1) < 1) diags.push_back("workers must be >= 1");
    int threshold = j.value("judge_threshold", 2);
    if (threshold < 1 || threshold > 4) diags.push_back("judge_threshold must be in [1,4]");
    if (j.contains("mining") && j["mining"].value("runs", 5) < 1)
        diags.push_back("mining.runs must be >= 1");
    return diags;
}

inline RunConfig parse_config(const json& j, const std::filesystem::path& base,
                              std::string snapshot) {
    auto diags = validate_config_json(j, base);
    if (!diags.empty()) throw Error("invalid config: " + diags.front());
    RunConfig cfg;
    cfg.company_name = j["company"]["name"].get<std::string>();
    cfg.corporate_summary = j["company"]["summary"].get<std::string>();
    cfg.attribute_mode =
        j["attribute_mode"].get<std::string>() == "B2B" ? BusinessMode::B2B : BusinessMode::B2C;
    cfg.ablation = ablation_from_name(j.value("ablation", std::string("full")));
    if (j.contains("knowledge_sources"))
        for (const auto& src : j["knowledge_sources"]) {
            KnowledgeSource s;
            s.path = (base / src["path"].get<std::string>()).string();
            s.category = src["category"].get<std::string>();
            s.format = detail::format_from_name(src["format"].get<std::string>());
            cfg.knowledge_sources.push_back(std::move(s));
        }
    for (const auto& c : j["capabilities"]) {
        CapabilitySpec spec;
        spec.stage = c.contains("stage") ? detail::stage_from_name(c["stage"].get<std::string>())
                                         : CapabilityStage::Custom;
        spec.statement = c["statement"].get<std::string>();
        cfg.capabilities.push_back(std::move(spec));
    }
    cfg.simulator = detail::parse_role(j["providers"]["simulator"], base);
    cfg.judge = detail::parse_role(j["providers"]["judge"], base);
    cfg.miner = detail::parse_role(j["providers"]["miner"], base);
    if (j.contains("adapter")) {
        const json& a = j["adapter"];
        cfg.adapter.kind = a.value("kind", std::string("echo"));
        cfg.adapter.flaky_p = a.value("p", 0.5);
        cfg.adapter.seed = a.value("seed", 1ULL);
        if (a.contains("planted_fact")) cfg.adapter.planted_fact = a["planted_fact"].get<std::string>();
        cfg.adapter.endpoint = a.value("endpoint", std::string());
    }
    cfg.seed = j.value("seed", 0ULL);
    cfg.budget = j.value("budget", 10);
    cfg.workers = j.value("workers", 1);
    cfg.judge_threshold = j.value("judge_threshold", 2);
    cfg.resample_budget = j.value("resample_budget", 5);
    if (j.contains("mining")) {
        cfg.mining.runs = j["mining"].value("runs", 5);
        cfg.mining.batch_size = j["mining"].value("batch_size", std::size_t(50));
    }
    if (j.contains("lexdiv")) {
        cfg.diversity.mtld_threshold = j["lexdiv"].value("mtld_threshold", 0.72);
        cfg.diversity.hdd_sample_size = j["lexdiv"].value("hdd_sample_size", 42);
    }
    cfg.doc_chunk_tokens = j.value("doc_chunk_tokens", std::size_t(512));
    cfg.embedding_dim = j.value("embedding_dim", std::size_t(256));
    cfg.extra_world_knowledge = j.value("extra_world_knowledge", std::string());
    cfg.snapshot = std::move(snapshot);
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::string raw = read_file(path);
    json j = json::parse(raw);
    return parse_config(j, path.parent_path(), std::move(raw));
}

}  // namespace sage
