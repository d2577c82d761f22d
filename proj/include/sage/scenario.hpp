#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sage/gateway.hpp"
#include "sage/knowledge.hpp"
#include "sage/prompts.hpp"

namespace sage {

struct UserGoal {
    std::string id;
    std::string text;
    CapabilitySpec source_capability;
};

struct AttributeSet {
    BusinessMode mode = BusinessMode::B2B;
    std::vector<std::pair<std::string, std::string>> items;  // schema order

    const std::string* find(const std::string& key) const {
        for (const auto& [k, v] : items)
            if (k == key) return &v;
        return nullptr;
    }

    std::string as_lines() const {
        std::string out;
        for (const auto& [k, v] : items) {
            out += k + ": " + v + "\n";
        }
        if (!out.empty()) out.pop_back();
        return out;
    }
};

struct UserProfile {
    AttributeSet attributes;
    std::string rendered;  // second-person narrative
};

struct TaskScenario {
    std::string id;
    UserGoal goal;
    KnowledgePiece knowledge;  // content empty under the no-agent-infra ablation
    UserProfile profile;
    std::string corporate_summary;
    std::string system_prompt;
    std::uint64_t seed = 0;
};

// ------------------------------------------------------------- goal handling

inline std::vector<UserGoal> derive_goals(const std::vector<CapabilitySpec>& capabilities,
                                          const Gateway& gateway, const RequestOptions& opts) {
    if (capabilities.empty()) throw PreconditionError("derive_goals: no capabilities");
    StructureSchema schema;
    schema.fields["goal"] = {FieldSpec::Kind::String};
    std::vector<UserGoal> goals;
    for (std::size_t i = 0; i < capabilities.size(); ++i) {
        const auto& cap = capabilities[i];
        std::string prompt = replace_all(prompts::kDeriveGoal, "{capability}",
                                         stage_name(cap.stage) + ": " + cap.statement);
        json parsed = gateway.complete_structured(opts.request({{Role::User, prompt}}), schema);
        goals.push_back({"goal-" + std::to_string(i), parsed.at("goal").get<std::string>(), cap});
    }
    return goals;
}

// Round-robin over the goal list; thread safe.
class GoalCycle {
public:
    explicit GoalCycle(std::vector<UserGoal> goals) : goals_(std::move(goals)) {
        if (goals_.empty()) throw PreconditionError("goal cycle needs at least one goal");
    }

    UserGoal next_goal() {
        std::lock_guard<std::mutex> lock(mutex_);
        const UserGoal& g = goals_[next_ % goals_.size()];
        ++next_;
        return g;
    }

    std::size_t size() const { return goals_.size(); }

private:
    std::vector<UserGoal> goals_;
    std::size_t next_ = 0;
    std::mutex mutex_;
};

// -------------------------------------------------------- knowledge selection

inline std::vector<std::string> select_categories(const UserGoal& goal,
                                                  const std::vector<std::string>& categories,
                                                  const Gateway& gateway,
                                                  const RequestOptions& opts) {
    if (categories.empty()) throw PreconditionError("select_categories: no categories");
    if (categories.size() == 1) return categories;
    std::string listing;
    for (const auto& c : categories) listing += "- " + c + "\n";
    if (!listing.empty()) listing.pop_back();
    std::string prompt = replace_all(prompts::kSelectCategories, "{categories}", listing);
    prompt = replace_all(prompt, "{goal}", goal.text);
    StructureSchema schema;
    schema.fields["categories"] = {FieldSpec::Kind::Array};
    json parsed = gateway.complete_structured(opts.request({{Role::User, prompt}}), schema);
    std::vector<std::string> chosen;
    for (const auto& item : parsed.at("categories")) {
        if (!item.is_string()) continue;
        auto name = item.get<std::string>();
        bool known = std::find(categories.begin(), categories.end(), name) != categories.end();
        bool dup = std::find(chosen.begin(), chosen.end(), name) != chosen.end();
        if (known && !dup) chosen.push_back(name);
    }
    if (chosen.empty()) return categories;  // all names out of vocabulary
    return chosen;
}

// Shared per-run usage counters; guarded so parallel scenario builders see
// linearizable increments.
class UsageState {
public:
    template <typename Fn>
    auto with_lock(Fn&& fn) -> decltype(fn(*this)) {
        std::lock_guard<std::mutex> lock(mutex_);
        return fn(*this);
    }

    int count(const std::string& piece_id) const {
        auto it = counts_.find(piece_id);
        return it == counts_.end() ? 0 : it->second;
    }

    void increment(const std::string& piece_id) { ++counts_[piece_id]; }

private:
    std::map<std::string, int> counts_;
    std::mutex mutex_;
};

// Picks the best-matching cluster across the selected categories, then an
// unused member uniformly; once the cluster is exhausted any member may
// repeat. Ties resolve to the earliest category/cluster.
inline KnowledgePiece select_knowledge(const Vec& goal_embedding, const CorpusIndex& index,
                                       const std::vector<std::string>& selected_categories,
                                       UsageState& usage, std::mt19937_64& rng) {
    if (selected_categories.empty()) throw PreconditionError("select_knowledge: no categories");
    const std::vector<KnowledgePiece>* best_pieces = nullptr;
    const Cluster* best_cluster = nullptr;
    double best_sim = -2.0;
    for (const auto& cat : selected_categories) {
        auto pit = index.categories.find(cat);
        auto cit = index.clusters.find(cat);
        if (pit == index.categories.end() || cit == index.clusters.end()) continue;
        for (const auto& cluster : cit->second) {
            double sim = cosine(goal_embedding, cluster.centroid);
            if (sim > best_sim) {
                best_sim = sim;
                best_cluster = &cluster;
                best_pieces = &pit->second;
            }
        }
    }
    if (!best_cluster) throw PreconditionError("select_knowledge: selected categories have no pieces");

    return usage.with_lock([&](UsageState& state) {
        std::vector<std::size_t> unused;
        for (auto idx : best_cluster->member_indices)
            if (state.count((*best_pieces)[idx].id) == 0) unused.push_back(idx);
        std::size_t chosen;
        if (!unused.empty()) chosen = unused[pick_index(rng, unused.size())];
        else
            chosen = best_cluster->member_indices[pick_index(rng, best_cluster->member_indices.size())];
        KnowledgePiece piece = (*best_pieces)[chosen];
        state.increment(piece.id);
        piece.times_used = state.count(piece.id);
        return piece;
    });
}

// --------------------------------------------------------- profile assembly

inline AttributeSet sample_attributes(const std::vector<AttributeSchema>& schemas,
                                      const std::string& knowledge_content, const Gateway& gateway,
                                      const RequestOptions& opts, std::mt19937_64& rng,
                                      int num_personas = 1) {
    AttributeSet attrs;
    std::vector<const AttributeSchema*> dynamic;
    for (const auto& schema : schemas) {
        schema.check();
        if (schema.kind == AttributeKind::Predefined) {
            attrs.items.emplace_back(schema.key, schema.values[pick_index(rng, schema.values.size())]);
        } else {
            attrs.items.emplace_back(schema.key, "");  // placeholder, filled below
            dynamic.push_back(&schema);
        }
    }
    if (dynamic.empty()) return attrs;

    std::string descriptions;
    for (const auto* schema : dynamic) descriptions += schema->key + ": " + schema->description + "\n";
    descriptions.pop_back();

    std::string prompt = replace_all(prompts::kGenerateAttributes, "{num_personas}",
                                     std::to_string(num_personas));
    prompt = replace_all(prompt, "{knowledge}", knowledge_content);
    prompt = replace_all(prompt, "{category_description}", descriptions);

    StructureSchema schema;
    FieldSpec attrs_field;
    attrs_field.kind = FieldSpec::Kind::Array;
    for (const auto* s : dynamic) attrs_field.item_keys.push_back(s->key);
    schema.fields["attributes"] = attrs_field;

    json parsed = gateway.complete_structured(opts.request({{Role::User, prompt}}), schema);
    if (parsed.at("attributes").empty())
        throw GatewayError("attribute generation returned an empty persona list");
    const json& persona = parsed.at("attributes").at(0);
    for (auto& [key, value] : attrs.items) {
        if (!value.empty()) continue;
        const json& v = persona.at(key);
        value = v.is_string() ? v.get<std::string>() : v.dump();
    }
    return attrs;
}

struct ConsistencyVerdict {
    bool consistent = true;
    std::string reason;
};

inline std::vector<std::vector<std::string>> default_dependency_groups() {
    return {{"job_information", "industry", "business_type", "company_size", "company_name"},
            {"customer_type", "deal_stage"}};
}

inline ConsistencyVerdict validate_attributes(
    const AttributeSet& attrs, const Gateway& gateway, const RequestOptions& opts,
    const std::vector<std::vector<std::string>>& groups = default_dependency_groups()) {
    StructureSchema schema;
    schema.fields["thought"] = {FieldSpec::Kind::String};
    FieldSpec response;
    response.one_of = {"Yes", "No"};
    schema.fields["response"] = response;

    for (const auto& group : groups) {
        std::string listing;
        int present = 0;
        for (const auto& key : group) {
            if (const auto* v = attrs.find(key)) {
                listing += key + ": " + *v + "\n";
                ++present;
            }
        }
        if (present < 2) continue;  // nothing to cross-check
        listing.pop_back();
        std::string prompt = replace_all(prompts::kValidateAttributes, "{user_attributes}", listing);
        json parsed = gateway.complete_structured(opts.request({{Role::User, prompt}}), schema);
        if (parsed.at("response").get<std::string>() == "No")
            return {false, parsed.at("thought").get<std::string>()};
    }
    return {true, ""};
}

inline UserProfile render_profile(const AttributeSet& attrs, const Gateway& gateway,
                                  const RequestOptions& opts, const std::string& company_name) {
    std::string prompt = replace_all(prompts::kRenderProfile, "{user_attr}", attrs.as_lines());
    CompletionRequest req = opts.request({{Role::User, prompt}});
    const int max_attempts = 3;
    std::string text;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        text = trim(gateway.complete(req));
        const bool ok = starts_with(text, "You are ") && contains(text, " who is ") &&
                        !starts_with(text, "Profile:");
        if (ok) {
            text = replace_all(std::move(text), "<Company>", company_name);
            return {attrs, text};
        }
        if (attempt < max_attempts) {
            req.messages.push_back({Role::Assistant, text});
            req.messages.push_back(
                {Role::User,
                 "The profile must begin with \"You are <name> who is \" followed by the five "
                 "personality traits, with no \"Profile:\" prefix. Rewrite it."});
        }
    }
    throw ExhaustedRetriesError("profile rendering violated the prefix rule after " +
                                    std::to_string(max_attempts) + " attempts",
                                text);
}

inline TaskScenario build_scenario(const UserGoal& goal, const KnowledgePiece& knowledge,
                                   const UserProfile& profile, const std::string& corporate_summary,
                                   const std::string& extra_world_knowledge = "") {
    if (goal.text.empty()) throw PreconditionError("build_scenario: empty goal");
    if (knowledge.content.empty()) throw PreconditionError("build_scenario: empty knowledge content");
    if (profile.rendered.empty()) throw PreconditionError("build_scenario: empty profile");
    if (corporate_summary.empty()) throw PreconditionError("build_scenario: empty corporate summary");
    TaskScenario s;
    s.goal = goal;
    s.knowledge = knowledge;
    s.profile = profile;
    s.corporate_summary = corporate_summary;
    std::string prompt = prompts::kSimulatorSystem;
    prompt = replace_all(prompt, "{summary}", corporate_summary);
    prompt = replace_all(prompt, "{profile}", profile.rendered);
    prompt = replace_all(prompt, "{goal}", goal.text);
    prompt = replace_all(prompt, "{knowledge}", knowledge.content);
    if (!extra_world_knowledge.empty())
        prompt += "\n\nOther world knowledge for this interaction:\n" + extra_world_knowledge;
    s.system_prompt = prompt;
    return s;
}

}  // namespace sage
