#pragma once

#include <array>
#include <string>
#include <vector>

#include "sage/gateway.hpp"

namespace sage {

// Deterministic offline provider. Two base modes per the gateway contract:
// hash-deterministic babble and scripted replay tables. Scripts may also use
// pattern rules with canned behaviors so a whole pipeline run can be driven
// without a network; every behavior is a pure function of (seed, request).
class MockProvider : public Provider {
public:
    explicit MockProvider(const ProviderBinding& binding) : seed_(binding.seed) {
        if (!binding.script_path.empty())
            script_ = json::parse(read_file(binding.script_path));
    }

    MockProvider(std::uint64_t seed, json script) : seed_(seed), script_(std::move(script)) {}

    std::string complete(const CompletionRequest& request) override {
        const std::uint64_t fp = request_fingerprint(request);
        if (script_.is_object()) {
            if (script_.contains("replay")) {
                const auto& table = script_.at("replay");
                auto it = table.find(hex64(fp));
                if (it != table.end()) return it->get<std::string>();
            }
            if (script_.contains("rules")) {
                const std::string flat = flatten(request);
                for (const auto& rule : script_.at("rules")) {
                    const auto needle = rule.value("match", std::string());
                    if (!needle.empty() && !contains(flat, needle)) continue;
                    return apply_rule(rule, request, flat, fp);
                }
            }
            const auto fallback = script_.value("fallback", std::string("babble"));
            if (fallback == "error")
                throw GatewayError("mock provider: no scripted rule matched request");
        }
        return babble(seed_ ^ fp, 12);
    }

private:
    static std::string flatten(const CompletionRequest& request) {
        std::string out;
        for (const auto& m : request.messages) {
            out += role_name(m.role);
            out += ": ";
            out += m.content;
            out += '\n';
        }
        return out;
    }

    static const std::vector<std::string>& word_bank() {
        static const std::vector<std::string> words = {
            "robot",    "delivery", "price",    "battery",  "charge",   "warranty",
            "outdoor",  "indoor",   "weight",   "capacity", "discount", "shipping",
            "order",    "return",   "policy",   "model",    "sensor",   "navigation",
            "speed",    "budget",   "demo",     "quote",    "lease",    "rental",
            "support",  "manual",   "install",  "cleaning", "catering", "farm",
            "venue",    "hotel",    "restaurant", "tray",   "payload",  "terrain",
            "dust",     "rain",     "servo",    "docking",  "fleet",    "route",
            "map",      "schedule", "invoice",  "contract", "upgrade",  "firmware",
            "camera",   "lidar"};
        return words;
    }

    static std::string babble(std::uint64_t stream_seed, int n_words) {
        std::mt19937_64 rng(stream_seed);
        const auto& words = word_bank();
        std::string out;
        for (int i = 0; i < n_words; ++i) {
            if (i) out += ' ';
            out += words[pick_index(rng, words.size())];
        }
        return out;
    }

    std::string apply_rule(const json& rule, const CompletionRequest& request,
                           const std::string& flat, std::uint64_t fp) const {
        if (rule.contains("respond")) return rule.at("respond").get<std::string>();
        const auto action = rule.value("action", std::string("babble"));
        std::mt19937_64 rng(seed_ ^ fp);
        if (action == "babble") return babble(seed_ ^ fp, rule.value("words", 12));
        if (action == "user_sim") return user_sim(rule, request, rng);
        if (action == "judge_score") return judge_score(rule, flat);
        if (action == "derive_goal") return derive_goal(flat);
        if (action == "select_categories") return select_categories(flat, rng);
        if (action == "gen_attributes") return gen_attributes(flat, rng);
        if (action == "render_profile") return render_profile(flat, rng);
        if (action == "categorize") return categorize(flat);
        if (action == "dedupe") return dedupe(flat);
        throw GatewayError("mock provider: unknown scripted action '" + action + "'");
    }

    static std::string user_sim(const json& rule, const CompletionRequest& request,
                                std::mt19937_64& rng) {
        // In the simulator mapping the agent speaks with role=user, so the
        // number of user messages equals the number of simulator turns already
        // answered by the agent.
        int answered = 0;
        for (const auto& m : request.messages)
            if (m.role == Role::User) ++answered;
        const int stop_after = rule.value("stop_after", 3);
        if (answered + 1 >= stop_after) return "###STOP###";
        const auto& words = word_bank();
        auto w = [&] { return words[pick_index(rng, words.size())]; };
        static const std::array<const char*, 4> shapes = {
            "hey, what about the {a} {b}?", "can it handle {a} {b} ok?",
            "hmm how does {a} compare for {b}?", "need info on {a} and {b} pls"};
        std::string s = shapes[pick_index(rng, shapes.size())];
        s = replace_all(s, "{a}", w());
        s = replace_all(s, "{b}", w());
        return s;
    }

    static std::string judge_score(const json& rule, const std::string& flat) {
        const auto needle = rule.value("needle", std::string());
        const bool hit = !needle.empty() && contains(flat, needle);
        json out;
        out["score"] = hit ? rule.value("score_hit", 1) : rule.value("score_miss", 3);
        out["reason"] = hit ? rule.value("reason_hit", std::string("response contradicts the grounding knowledge"))
                            : rule.value("reason_miss", std::string("response is acceptable for this dimension"));
        return out.dump();
    }

    static std::string derive_goal(const std::string& flat) {
        auto lines = split_lines(flat);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (trim(lines[i]) != "Capability:") continue;
            for (std::size_t j = i + 1; j < lines.size(); ++j) {
                auto body = trim(lines[j]);
                if (body.empty()) continue;
                auto colon = body.find(": ");
                if (colon != std::string::npos) body = body.substr(colon + 2);
                json out;
                out["goal"] = "As a customer, you want the agent to " + to_lower(body);
                return out.dump();
            }
        }
        throw GatewayError("mock derive_goal: no capability block in prompt");
    }

    static std::string select_categories(const std::string& flat, std::mt19937_64& rng) {
        auto lines = split_lines(flat);
        std::vector<std::string> cats;
        bool in_list = false;
        for (const auto& raw : lines) {
            auto line = trim(raw);
            if (line == "Categories:") {
                in_list = true;
                continue;
            }
            if (!in_list) continue;
            if (starts_with(line, "- ")) cats.push_back(line.substr(2));
            else if (!line.empty()) break;
        }
        if (cats.empty()) throw GatewayError("mock select_categories: no category list in prompt");
        json out;
        out["categories"] = json::array({cats[pick_index(rng, cats.size())]});
        return out.dump();
    }

    static std::string gen_attributes(const std::string& flat, std::mt19937_64& rng) {
        auto lines = split_lines(flat);
        json values = json::object();
        bool in_list = false;
        for (const auto& raw : lines) {
            auto line = trim(raw);
            // the prompt carries an in-context example with the same marker;
            // only the last block holds the real categories
            if (contains(line, "you need to generate values for")) {
                in_list = true;
                values = json::object();
                continue;
            }
            if (!in_list) continue;
            if (line.empty() || line == "Return:") {
                if (!values.empty()) in_list = false;
                continue;
            }
            auto colon = line.find(": ");
            if (colon == std::string::npos) continue;
            const std::string key = line.substr(0, colon);
            const auto& words = word_bank();
            std::string a = words[pick_index(rng, words.size())];
            std::string b = words[pick_index(rng, words.size())];
            a[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(a[0])));
            values[key] = a + " " + b;
        }
        if (values.empty()) throw GatewayError("mock gen_attributes: no attribute descriptions in prompt");
        json out;
        out["attributes"] = json::array({values});
        return out.dump();
    }

    static std::string render_profile(const std::string& flat, std::mt19937_64& rng) {
        auto lines = split_lines(flat);
        std::vector<std::pair<std::string, std::string>> attrs;
        bool in_list = false;
        for (const auto& raw : lines) {
            auto line = trim(raw);
            if (line == "User attributes:") {
                in_list = true;
                continue;
            }
            if (!in_list) continue;
            if (line.empty() || line == "Profile:") {
                if (!attrs.empty()) break;
                continue;
            }
            auto colon = line.find(": ");
            if (colon == std::string::npos) continue;
            attrs.emplace_back(line.substr(0, colon), line.substr(colon + 2));
        }
        static const std::array<const char*, 8> first = {"Zara", "Alex", "Mina", "Ravi",
                                                         "Lena", "Omar", "June", "Pavel"};
        static const std::array<const char*, 8> last = {"Khan",  "Morgan", "Sato",  "Iyer",
                                                        "Weber", "Haddad", "Park", "Novak"};
        static const std::array<const char*, 5> trait_keys = {
            "openness", "conscientiousness", "extraversion", "agreeableness", "neuroticism"};
        std::vector<std::string> traits;
        for (const auto& key : trait_keys)
            for (const auto& [k, v] : attrs)
                if (k == key) traits.push_back(v);
        while (traits.size() < 5) traits.push_back("curious");
        std::string out = "You are ";
        out += first[pick_index(rng, first.size())];
        out += ' ';
        out += last[pick_index(rng, last.size())];
        out += " who is " + traits[0] + ", " + traits[1] + ", " + traits[2] + ", " + traits[3] +
               ", and " + traits[4] + ".";
        for (const auto& [k, v] : attrs) {
            bool is_trait = std::find(trait_keys.begin(), trait_keys.end(), k) != trait_keys.end();
            if (is_trait) continue;
            out += " Your " + replace_all(k, "_", " ") + " is " + v + ".";
        }
        return out;
    }

    struct CaseLine {
        std::string id;
        std::string dimension;
        std::string reason;
    };

    static std::vector<CaseLine> parse_cases(const std::string& flat) {
        std::vector<CaseLine> cases;
        for (const auto& raw : split_lines(flat)) {
            auto line = trim(raw);
            if (starts_with(line, "item_id: ")) cases.push_back({line.substr(9), "", ""});
            else if (!cases.empty() && starts_with(line, "dimension: "))
                cases.back().dimension = line.substr(11);
            else if (!cases.empty() && starts_with(line, "reason: "))
                cases.back().reason = line.substr(8);
        }
        return cases;
    }

    static std::pair<std::string, std::string> dimension_category(const std::string& dim) {
        if (dim == "faithfulness")
            return {"Inaccurate Answer", "The agent states facts contradicted by its knowledge."};
        if (dim == "helpfulness")
            return {"Unhelpful Response", "The agent fails to address the customer's need."};
        if (dim == "relevance")
            return {"Irrelevant Response", "The agent answers something the customer did not ask."};
        if (dim == "coherence")
            return {"Incoherent Response", "The agent's reply is contradictory or hard to follow."};
        return {"Verbosity Defect", "The agent's reply length does not fit the request."};
    }

    static std::string categorize(const std::string& flat) {
        auto cases = parse_cases(flat);
        if (cases.empty()) throw GatewayError("mock categorize: no failure cases in prompt");
        json errors = json::array();
        std::vector<std::string> seen;
        for (const auto& c : cases) {
            auto [name, desc] = dimension_category(c.dimension);
            if (std::find(seen.begin(), seen.end(), name) != seen.end()) continue;
            seen.push_back(name);
            errors.push_back({{"thought", "cases with low " + c.dimension + " scores share this failure"},
                              {"high_level_error_category", name},
                              {"description", desc}});
        }
        json out;
        out["errors"] = errors;
        return out.dump();
    }

    static std::string dedupe(const std::string& flat) {
        auto cases = parse_cases(flat);
        if (cases.empty()) throw GatewayError("mock dedupe: no failure cases in prompt");
        std::vector<std::string> order;
        std::map<std::string, std::vector<const CaseLine*>> groups;
        for (const auto& c : cases) {
            auto key = c.dimension + "|" + c.reason;
            if (!groups.count(key)) order.push_back(key);
            groups[key].push_back(&c);
        }
        json uniques = json::array();
        for (const auto& key : order) {
            const auto& members = groups[key];
            json ids = json::array();
            for (const auto* c : members) ids.push_back(c->id);
            uniques.push_back({{"high_level_error_category",
                                dimension_category(members.front()->dimension).first},
                               {"unique_error_description", members.front()->reason},
                               {"example", ids}});
        }
        json out;
        out["unique_errors"] = uniques;
        return out.dump();
    }

    std::uint64_t seed_;
    json script_;
};

}  // namespace sage
