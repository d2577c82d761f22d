#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sage/gateway.hpp"
#include "sage/judge.hpp"
#include "sage/prompts.hpp"

namespace sage {

struct FailureCase {
    std::string item_id;
    std::string transcript_id;
    int turn_index = 0;
    Dimension dimension = Dimension::Helpfulness;
    int score = 0;
    std::string reason;
    bool is_first_turn = false;
};

struct HighLevelCategory {
    std::string name;
    std::string description;
    std::string thought;
};

struct UniqueBug {
    std::string category;
    std::string description;
    std::vector<std::string> examples;  // item ids, non-empty
};

struct BugReport {
    std::string run_id;
    std::vector<HighLevelCategory> categories;
    std::vector<UniqueBug> unique_bugs;
    std::map<std::string, int> per_category_counts;
    int first_turn_bugs = 0;
    int later_turn_bugs = 0;
};

struct RunAggregate {
    std::vector<int> counts;
    double mean = 0.0;
    double stddev = 0.0;  // population
};

inline RunAggregate aggregate_counts(const std::vector<int>& counts) {
    if (counts.empty()) throw PreconditionError("aggregate over zero runs");
    RunAggregate agg;
    agg.counts = counts;
    double sum = 0.0;
    for (int c : counts) sum += c;
    agg.mean = sum / static_cast<double>(counts.size());
    double sq = 0.0;
    for (int c : counts) sq += (c - agg.mean) * (c - agg.mean);
    agg.stddev = std::sqrt(sq / static_cast<double>(counts.size()));
    return agg;
}

// One FailureCase per failing dimension of each flagged turn; the first agent
// turn of a transcript sits at index 1.
inline std::vector<FailureCase> make_failure_cases(const std::vector<FlaggedTurn>& flagged) {
    std::vector<FailureCase> cases;
    for (const auto& turn : flagged) {
        for (const auto& s : turn.failing) {
            FailureCase fc;
            fc.item_id = "fc-" + turn.transcript_id + "-t" + std::to_string(turn.turn_index) + "-" +
                         dimension_name(s.dimension);
            fc.transcript_id = turn.transcript_id;
            fc.turn_index = turn.turn_index;
            fc.dimension = s.dimension;
            fc.score = s.score;
            fc.reason = s.reason;
            fc.is_first_turn = turn.turn_index == 1;
            cases.push_back(std::move(fc));
        }
    }
    return cases;
}

namespace detail {

inline std::string serialize_cases(const std::vector<FailureCase>& cases, std::size_t begin,
                                   std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        const auto& c = cases[i];
        out += "item_id: " + c.item_id + "\n";
        out += "dimension: " + dimension_name(c.dimension) + "\n";
        out += "score: " + std::to_string(c.score) + "\n";
        out += "reason: " + c.reason + "\n";
        out += "first_turn: " + std::string(c.is_first_turn ? "true" : "false") + "\n\n";
    }
    return out;
}

}  // namespace detail

inline std::vector<HighLevelCategory> categorize(const std::vector<FailureCase>& cases,
                                                 const Gateway& gateway, const RequestOptions& opts,
                                                 std::size_t batch_size = 50) {
    if (cases.empty()) throw PreconditionError("categorize: no failure cases");
    if (batch_size == 0) throw PreconditionError("batch size must be positive");
    StructureSchema schema;
    FieldSpec errors;
    errors.kind = FieldSpec::Kind::Array;
    errors.item_keys = {"thought", "high_level_error_category", "description"};
    schema.fields["errors"] = errors;

    std::vector<HighLevelCategory> categories;
    std::set<std::string> seen;  // case-insensitive names
    for (std::size_t begin = 0; begin < cases.size(); begin += batch_size) {
        std::size_t end = std::min(begin + batch_size, cases.size());
        std::string prompt = replace_all(prompts::kCategorizeFailures, "{items}",
                                         detail::serialize_cases(cases, begin, end));
        json parsed = gateway.complete_structured(opts.request({{Role::User, prompt}}), schema);
        for (const auto& e : parsed.at("errors")) {
            HighLevelCategory cat;
            cat.name = e.at("high_level_error_category").get<std::string>();
            cat.description = e.at("description").get<std::string>();
            cat.thought = e.at("thought").get<std::string>();
            if (!seen.insert(to_lower(cat.name)).second) continue;  // merged, first wins
            categories.push_back(std::move(cat));
        }
    }
    return categories;
}

inline std::vector<UniqueBug> dedupe(const std::vector<FailureCase>& cases,
                                     const std::vector<HighLevelCategory>& categories,
                                     const Gateway& gateway, const RequestOptions& opts,
                                     std::size_t batch_size = 50) {
    if (cases.empty()) throw PreconditionError("dedupe: no failure cases");
    std::set<std::string> known_ids;
    for (const auto& c : cases) known_ids.insert(c.item_id);
    std::set<std::string> known_categories;
    std::string category_listing;
    for (const auto& cat : categories) {
        known_categories.insert(cat.name);
        category_listing += cat.name + ": " + cat.description + "\n";
    }
    if (!category_listing.empty()) category_listing.pop_back();

    StructureSchema schema;
    FieldSpec uniques;
    uniques.kind = FieldSpec::Kind::Array;
    uniques.item_keys = {"high_level_error_category", "unique_error_description", "example"};
    schema.fields["unique_errors"] = uniques;

    std::vector<UniqueBug> bugs;
    for (std::size_t begin = 0; begin < cases.size(); begin += batch_size) {
        std::size_t end = std::min(begin + batch_size, cases.size());
        std::string prompt = replace_all(prompts::kDedupeFailures, "{high_level_failure_categories}",
                                         category_listing);
        prompt = replace_all(prompt, "{items}", detail::serialize_cases(cases, begin, end));
        json parsed = gateway.complete_structured(opts.request({{Role::User, prompt}}), schema);
        for (const auto& e : parsed.at("unique_errors")) {
            UniqueBug bug;
            bug.category = e.at("high_level_error_category").get<std::string>();
            bug.description = e.at("unique_error_description").get<std::string>();
            const json& examples = e.at("example");
            std::vector<std::string> raw_ids;
            if (examples.is_array()) {
                for (const auto& item : examples)
                    if (item.is_string()) raw_ids.push_back(item.get<std::string>());
            } else if (examples.is_string()) {
                raw_ids.push_back(examples.get<std::string>());
            }
            for (const auto& blob : raw_ids) {
                // the stage-2 format sometimes comma-joins ids in one string
                std::size_t pos = 0;
                while (pos <= blob.size()) {
                    std::size_t comma = blob.find(',', pos);
                    std::string id = trim(blob.substr(pos, comma - pos));
                    if (known_ids.count(id)) bug.examples.push_back(id);  // unknown ids dropped
                    if (comma == std::string::npos) break;
                    pos = comma + 1;
                }
            }
            if (bug.examples.empty()) continue;  // no surviving evidence
            if (!known_categories.count(bug.category)) bug.category = "Other";
            bugs.push_back(std::move(bug));
        }
    }
    return bugs;
}

inline BugReport build_report(std::string run_id, std::vector<HighLevelCategory> categories,
                              std::vector<UniqueBug> bugs,
                              const std::vector<FailureCase>& cases) {
    std::map<std::string, bool> first_turn_by_id;
    for (const auto& c : cases) first_turn_by_id[c.item_id] = c.is_first_turn;
    BugReport report;
    report.run_id = std::move(run_id);
    report.categories = std::move(categories);
    report.unique_bugs = std::move(bugs);
    for (const auto& bug : report.unique_bugs) {
        ++report.per_category_counts[bug.category];
        bool first = false;
        for (const auto& id : bug.examples)
            if (first_turn_by_id.count(id) && first_turn_by_id.at(id)) first = true;
        if (first) ++report.first_turn_bugs;
        else ++report.later_turn_bugs;
    }
    return report;
}

using GatewayFactory = std::function<Gateway(std::size_t run_index)>;

// Repeats categorize+dedupe to control for mining variance; each repetition
// may use a differently seeded gateway.
inline std::pair<std::vector<BugReport>, RunAggregate> mine(
    const std::vector<FlaggedTurn>& flagged, const GatewayFactory& gateway_for_run,
    const RequestOptions& opts, std::size_t runs = 5, std::size_t batch_size = 50) {
    if (runs < 1) throw PreconditionError("mine: runs must be >= 1");
    const auto cases = make_failure_cases(flagged);
    std::vector<BugReport> reports;
    std::vector<int> counts;
    for (std::size_t r = 0; r < runs; ++r) {
        const std::string run_id = "mine-" + std::to_string(r + 1);
        if (cases.empty()) {
            reports.push_back(build_report(run_id, {}, {}, cases));
            counts.push_back(0);
            continue;
        }
        Gateway gateway = gateway_for_run(r);
        auto categories = categorize(cases, gateway, opts, batch_size);
        auto bugs = dedupe(cases, categories, gateway, opts, batch_size);
        counts.push_back(static_cast<int>(bugs.size()));
        reports.push_back(build_report(run_id, std::move(categories), std::move(bugs), cases));
    }
    return {std::move(reports), aggregate_counts(counts)};
}

// ------------------------------------------------------------- report files

inline json report_to_json(const BugReport& report) {
    json j;
    j["run_id"] = report.run_id;
    j["categories"] = json::array();
    for (const auto& c : report.categories)
        j["categories"].push_back(
            {{"name", c.name}, {"description", c.description}, {"thought", c.thought}});
    j["unique_bugs"] = json::array();
    for (const auto& b : report.unique_bugs)
        j["unique_bugs"].push_back(
            {{"category", b.category}, {"description", b.description}, {"examples", b.examples}});
    j["per_category_counts"] = report.per_category_counts;
    j["first_turn_bugs"] = report.first_turn_bugs;
    j["later_turn_bugs"] = report.later_turn_bugs;
    return j;
}

inline std::string report_to_markdown(const BugReport& report,
                                      const std::vector<FailureCase>& cases) {
    std::map<std::string, const FailureCase*> by_id;
    for (const auto& c : cases) by_id[c.item_id] = &c;
    std::string md = "# Bug report " + report.run_id + "\n\n";
    if (report.unique_bugs.empty()) {
        md += "No bugs found.\n";
        return md;
    }
    md += "Unique bugs: " + std::to_string(report.unique_bugs.size()) + " (" +
          std::to_string(report.first_turn_bugs) + " first-turn, " +
          std::to_string(report.later_turn_bugs) + " in later turns)\n\n";
    md += "## Categories\n\n";
    for (const auto& [name, count] : report.per_category_counts)
        md += "- " + name + ": " + std::to_string(count) + "\n";
    md += "\n## Bugs\n\n";
    int n = 0;
    for (const auto& bug : report.unique_bugs) {
        md += std::to_string(++n) + ". **[" + bug.category + "]** " + bug.description + "\n";
        for (const auto& id : bug.examples) {
            md += "   - ";
            auto it = by_id.find(id);
            if (it != by_id.end())
                md += "[" + it->second->transcript_id + " turn " +
                      std::to_string(it->second->turn_index) + "](" + id + ")";
            else
                md += id;
            md += "\n";
        }
    }
    return md;
}

inline void emit_report(const BugReport& report, const std::vector<FailureCase>& cases,
                        const std::filesystem::path& base_path) {
    write_file(base_path.string() + ".json", report_to_json(report).dump(2) + "\n");
    write_file(base_path.string() + ".md", report_to_markdown(report, cases));
}

}  // namespace sage
