#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "sage/bugminer.hpp"
#include "sage/config.hpp"
#include "sage/interaction.hpp"
#include "sage/judge.hpp"
#include "sage/knowledge.hpp"
#include "sage/lexdiv.hpp"
#include "sage/providers.hpp"
#include "sage/scenario.hpp"

namespace sage {

namespace fs = std::filesystem;

struct RunPaths {
    fs::path root;

    fs::path config_snapshot() const { return root / "config.json"; }
    fs::path scenarios() const { return root / "scenarios"; }
    fs::path transcripts() const { return root / "transcripts"; }
    fs::path evaluations() const { return root / "evaluations"; }
    fs::path reports() const { return root / "reports"; }
    fs::path diversity() const { return root / "diversity"; }

    fs::path scenario_file(const std::string& id) const { return scenarios() / (id + ".json"); }
    fs::path skipped_file(const std::string& id) const { return scenarios() / (id + ".skipped.json"); }
    fs::path transcript_file(const std::string& id) const { return transcripts() / (id + ".json"); }
    fs::path evaluations_file() const { return evaluations() / "evaluations.jsonl"; }
    fs::path flagged_file() const { return evaluations() / "flagged.jsonl"; }
    fs::path failure_cases_file() const { return reports() / "failure_cases.json"; }
    fs::path aggregate_file() const { return reports() / "aggregate.json"; }
    fs::path diversity_json() const { return diversity() / "diversity.json"; }
    fs::path diversity_table() const { return diversity() / "diversity.tsv"; }
    fs::path report_md() const { return root / "report.md"; }
};

namespace detail {

// Bounded worker pool; rethrows the first worker exception on join.
template <typename Fn>
inline void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (n == 0) return;
    const std::size_t pool = std::min<std::size_t>(std::max(workers, 1), n);
    if (pool == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < pool; ++t)
        threads.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

inline std::string scenario_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scn-%04zu", index);
    return buf;
}

}  // namespace detail

// ------------------------------------------------------------- persistence

inline json scenario_to_json(const TaskScenario& s) {
    json j;
    j["id"] = s.id;
    j["goal"] = {{"id", s.goal.id},
                 {"text", s.goal.text},
                 {"stage", stage_name(s.goal.source_capability.stage)},
                 {"statement", s.goal.source_capability.statement}};
    j["knowledge_id"] = s.knowledge.id;
    j["attributes"] = json::array();
    for (const auto& [k, v] : s.profile.attributes.items) j["attributes"].push_back({k, v});
    j["attribute_mode"] = business_mode_name(s.profile.attributes.mode);
    j["rendered_profile"] = s.profile.rendered;
    j["system_prompt"] = s.system_prompt;
    j["seed"] = s.seed;
    return j;
}

inline TaskScenario scenario_from_json(const json& j) {
    TaskScenario s;
    s.id = j.at("id").get<std::string>();
    s.goal.id = j.at("goal").at("id").get<std::string>();
    s.goal.text = j.at("goal").at("text").get<std::string>();
    s.goal.source_capability.stage =
        detail::stage_from_name(j.at("goal").at("stage").get<std::string>());
    s.goal.source_capability.statement = j.at("goal").at("statement").get<std::string>();
    s.knowledge.id = j.at("knowledge_id").get<std::string>();
    s.profile.attributes.mode =
        j.value("attribute_mode", std::string("B2B")) == "B2C" ? BusinessMode::B2C : BusinessMode::B2B;
    for (const auto& pair : j.at("attributes"))
        s.profile.attributes.items.emplace_back(pair.at(0).get<std::string>(),
                                                pair.at(1).get<std::string>());
    s.profile.rendered = j.at("rendered_profile").get<std::string>();
    s.system_prompt = j.at("system_prompt").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

inline json transcript_to_json(const Transcript& t) {
    json j;
    j["scenario_id"] = t.scenario_id;
    j["stop_reason"] = stop_reason_name(t.stop_reason);
    j["seed"] = t.seed;
    j["user_turns"] = t.user_turn_count();
    j["turns"] = json::array();
    for (const auto& turn : t.turns)
        j["turns"].push_back({{"index", turn.index},
                              {"speaker", speaker_name(turn.speaker)},
                              {"content", turn.content},
                              {"latency_ms", turn.latency_ms}});
    return j;
}

inline Transcript transcript_from_json(const json& j) {
    Transcript t;
    t.scenario_id = j.at("scenario_id").get<std::string>();
    const auto reason = j.at("stop_reason").get<std::string>();
    t.stop_reason = reason == "sentinel"  ? StopReason::Sentinel
                    : reason == "budget"  ? StopReason::Budget
                                          : StopReason::AgentError;
    t.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& turn : j.at("turns"))
        t.turns.push_back({turn.at("index").get<int>(),
                           turn.at("speaker").get<std::string>() == "user" ? Speaker::User
                                                                           : Speaker::Agent,
                           turn.at("content").get<std::string>(),
                           turn.at("latency_ms").get<long>()});
    return t;
}

inline std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& suffix) {
    std::vector<fs::path> out;
    if (!fs::exists(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        auto name = entry.path().filename().string();
        if (name.size() >= suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<Transcript> load_transcripts(const RunPaths& paths) {
    std::vector<Transcript> out;
    for (const auto& file : sorted_files(paths.transcripts(), ".json"))
        out.push_back(transcript_from_json(json::parse(read_file(file))));
    return out;
}

// ------------------------------------------------------------- adapters

inline std::map<std::string, std::string> load_faq_entries(const RunConfig& cfg) {
    std::map<std::string, std::string> entries;
    for (const auto& src : cfg.knowledge_sources) {
        if (src.format != SourceFormat::Faq) continue;
        for (const auto& line : split_lines(read_file(src.path))) {
            if (trim(line).empty()) continue;
            json rec = json::parse(line);
            entries[rec.at("question").get<std::string>()] = rec.at("answer").get<std::string>();
        }
    }
    return entries;
}

inline std::shared_ptr<AgentAdapter> make_adapter(const RunConfig& cfg) {
    if (cfg.adapter.kind == "echo") return std::make_shared<EchoAdapter>();
    if (cfg.adapter.kind == "faq_lookup")
        return std::make_shared<FaqLookupAdapter>(load_faq_entries(cfg));
    if (cfg.adapter.kind == "flaky") {
        std::shared_ptr<AgentAdapter> inner;
        auto entries = load_faq_entries(cfg);
        if (entries.empty()) inner = std::make_shared<EchoAdapter>();
        else inner = std::make_shared<FaqLookupAdapter>(std::move(entries));
        return std::make_shared<FlakyAdapter>(std::move(inner), cfg.adapter.flaky_p,
                                              cfg.adapter.seed, cfg.adapter.planted_fact);
    }
    if (cfg.adapter.kind == "remote") return std::make_shared<RemoteAdapter>(cfg.adapter.endpoint);
    throw Error("unknown adapter kind: " + cfg.adapter.kind);
}

// ------------------------------------------------------------- generate

inline void stage_generate(const RunConfig& cfg, const RunPaths& paths, std::size_t n) {
    if (n == 0) throw PreconditionError("generate: need at least one scenario");
    fs::create_directories(paths.scenarios());
    fs::create_directories(paths.transcripts());
    // the snapshot is frozen at run start; a resumed run keeps the original
    if (!fs::exists(paths.config_snapshot()))
        write_file(paths.config_snapshot(), cfg.snapshot);

    Gateway sim = make_gateway(cfg.simulator.binding);
    const RequestOptions& sim_opts = cfg.simulator.options;
    auto adapter = make_adapter(cfg);

    CorpusIndex index;
    HashingEmbedder embedder(cfg.embedding_dim, cfg.seed);
    const bool use_corpus = cfg.ablation != Ablation::NoAgentInfra;
    if (use_corpus) {
        index = load_corpus(cfg.knowledge_sources, cfg.doc_chunk_tokens);
        embed_corpus(index, embedder);
        build_clusters(index, cfg.seed);
    }
    std::vector<std::string> category_names;
    for (const auto& [name, _] : index.categories) category_names.push_back(name);

    std::vector<AttributeSchema> schemas = default_attribute_schemas(cfg.attribute_mode);
    if (cfg.ablation == Ablation::NoIcp) {
        std::vector<AttributeSchema> kept;
        for (auto& s : schemas)
            if (s.group != AttributeGroup::Icp) kept.push_back(std::move(s));
        schemas = std::move(kept);
    }

    GoalCycle cycle(derive_goals(cfg.capabilities, sim, sim_opts));
    UsageState usage;

    std::vector<TaskScenario> pending;  // built but not yet rolled out
    for (std::size_t i = 0; i < n; ++i) {
        const std::string id = detail::scenario_name(i);
        const UserGoal goal = cycle.next_goal();
        if (fs::exists(paths.skipped_file(id))) continue;
        if (fs::exists(paths.scenario_file(id))) {
            // resumed run: keep selection counters aligned with the first pass
            TaskScenario existing = scenario_from_json(json::parse(read_file(paths.scenario_file(id))));
            if (!existing.knowledge.id.empty())
                usage.with_lock([&](UsageState& s) { s.increment(existing.knowledge.id); return 0; });
            if (!fs::exists(paths.transcript_file(id))) {
                if (const auto* piece = index.find(existing.knowledge.id))
                    existing.knowledge = *piece;
                else existing.knowledge.content = cfg.corporate_summary;
                pending.push_back(std::move(existing));
            }
            continue;
        }

        std::mt19937_64 rng(fnv1a64(id, cfg.seed));
        KnowledgePiece piece;
        if (use_corpus) {
            auto selected = select_categories(goal, category_names, sim, sim_opts);
            piece = select_knowledge(embedder.embed(goal.text), index, selected, usage, rng);
        } else {
            piece.content = cfg.corporate_summary;
        }

        AttributeSet attrs;
        std::string rejection;
        bool consistent = false;
        for (int attempt = 0; attempt < cfg.resample_budget && !consistent; ++attempt) {
            attrs = sample_attributes(schemas, piece.content, sim, sim_opts, rng);
            attrs.mode = cfg.attribute_mode;
            auto verdict = validate_attributes(attrs, sim, sim_opts);
            consistent = verdict.consistent;
            rejection = verdict.reason;
        }
        if (!consistent) {
            json skip = {{"id", id},
                         {"error", "attribute sets stayed inconsistent after " +
                                       std::to_string(cfg.resample_budget) + " samples"},
                         {"last_rejection", rejection}};
            write_file(paths.skipped_file(id), skip.dump(2) + "\n");
            continue;
        }

        UserProfile profile = render_profile(attrs, sim, sim_opts, cfg.company_name);
        TaskScenario scenario =
            build_scenario(goal, piece, profile, cfg.corporate_summary, cfg.extra_world_knowledge);
        scenario.id = id;
        scenario.seed = fnv1a64(id, cfg.seed);
        write_file(paths.scenario_file(id), scenario_to_json(scenario).dump(2) + "\n");
        pending.push_back(std::move(scenario));
    }

    const bool measure_latency = cfg.adapter.kind == "remote";
    detail::parallel_for(pending.size(), cfg.workers, [&](std::size_t i) {
        const TaskScenario& scenario = pending[i];
        Transcript t = run_interaction(scenario, *adapter, cfg.budget, sim, sim_opts, measure_latency);
        write_file(paths.transcript_file(scenario.id), transcript_to_json(t).dump(2) + "\n");
    });
}

// ------------------------------------------------------------- evaluate

inline void stage_evaluate(const RunConfig& cfg, const RunPaths& paths) {
    auto transcript_files = sorted_files(paths.transcripts(), ".json");
    if (transcript_files.empty())
        throw Error("no transcripts in " + paths.transcripts().string() + "; run generate first");
    fs::create_directories(paths.evaluations());

    std::vector<Transcript> transcripts;
    std::vector<std::string> grounding;  // per transcript, for faithfulness
    CorpusIndex index;
    bool corpus_loaded = false;
    for (const auto& file : transcript_files) {
        Transcript t = transcript_from_json(json::parse(read_file(file)));
        TaskScenario s = scenario_from_json(json::parse(read_file(paths.scenario_file(t.scenario_id))));
        std::string knowledge = cfg.corporate_summary;
        if (!s.knowledge.id.empty()) {
            if (!corpus_loaded) {
                index = load_corpus(cfg.knowledge_sources, cfg.doc_chunk_tokens);
                corpus_loaded = true;
            }
            if (const auto* piece = index.find(s.knowledge.id)) knowledge = piece->content;
            else throw Error("scenario " + s.id + " references unknown knowledge " + s.knowledge.id);
        }
        transcripts.push_back(std::move(t));
        grounding.push_back(std::move(knowledge));
    }

    Gateway judge = make_gateway(cfg.judge.binding);
    const RequestOptions& opts = cfg.judge.options;

    std::vector<std::vector<json>> lines(transcripts.size());
    std::vector<std::vector<TurnEvaluation>> evals(transcripts.size());
    detail::parallel_for(transcripts.size(), cfg.workers, [&](std::size_t i) {
        const Transcript& t = transcripts[i];
        for (const auto& turn : t.turns) {
            if (turn.speaker != Speaker::Agent) continue;
            try {
                TurnEvaluation e = score_turn(t, turn.index, grounding[i], judge, opts);
                json line = {{"transcript_id", e.transcript_id},
                             {"turn_index", e.turn_index},
                             {"scores", json::array()}};
                for (const auto& s : e.scores)
                    line["scores"].push_back({{"dimension", dimension_name(s.dimension)},
                                              {"score", s.score},
                                              {"reason", s.reason}});
                lines[i].push_back(std::move(line));
                evals[i].push_back(std::move(e));
            } catch (const GatewayError& e) {
                // one bad turn must not sink the batch
                lines[i].push_back({{"transcript_id", t.scenario_id},
                                    {"turn_index", turn.index},
                                    {"error", std::string(e.what())}});
            }
        }
    });

    std::string eval_out, flagged_out;
    for (std::size_t i = 0; i < transcripts.size(); ++i) {
        for (const auto& line : lines[i]) eval_out += line.dump() + "\n";
        for (const auto& f : flag_low_turns(evals[i], cfg.judge_threshold)) {
            json line = {{"transcript_id", f.transcript_id},
                         {"turn_index", f.turn_index},
                         {"failing", json::array()}};
            for (const auto& s : f.failing)
                line["failing"].push_back({{"dimension", dimension_name(s.dimension)},
                                           {"score", s.score},
                                           {"reason", s.reason}});
            flagged_out += line.dump() + "\n";
        }
    }
    write_file(paths.evaluations_file(), eval_out);
    write_file(paths.flagged_file(), flagged_out);
}

// ------------------------------------------------------------- mine

inline std::vector<FlaggedTurn> load_flagged(const RunPaths& paths) {
    if (!fs::exists(paths.flagged_file()))
        throw Error("no flagged turns at " + paths.flagged_file().string() + "; run evaluate first");
    std::vector<FlaggedTurn> flagged;
    for (const auto& line : split_lines(read_file(paths.flagged_file()))) {
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        FlaggedTurn f;
        f.transcript_id = j.at("transcript_id").get<std::string>();
        f.turn_index = j.at("turn_index").get<int>();
        for (const auto& s : j.at("failing"))
            f.failing.push_back({dimension_from_name(s.at("dimension").get<std::string>()),
                                 s.at("score").get<int>(), s.at("reason").get<std::string>()});
        flagged.push_back(std::move(f));
    }
    return flagged;
}

inline void stage_mine(const RunConfig& cfg, const RunPaths& paths) {
    auto flagged = load_flagged(paths);
    fs::create_directories(paths.reports());

    GatewayFactory factory = [&](std::size_t run_index) {
        ProviderBinding binding = cfg.miner.binding;
        if (binding.kind == ProviderKind::Mock) binding.seed += run_index;  // vary mining runs
        return make_gateway(binding);
    };
    auto [reports, aggregate] = mine(flagged, factory, cfg.miner.options,
                                     static_cast<std::size_t>(cfg.mining.runs),
                                     cfg.mining.batch_size);

    const auto cases = make_failure_cases(flagged);
    json cases_json = json::array();
    for (const auto& c : cases)
        cases_json.push_back({{"item_id", c.item_id},
                              {"transcript_id", c.transcript_id},
                              {"turn_index", c.turn_index},
                              {"dimension", dimension_name(c.dimension)},
                              {"score", c.score},
                              {"reason", c.reason},
                              {"first_turn", c.is_first_turn}});
    write_file(paths.failure_cases_file(), cases_json.dump(2) + "\n");

    for (const auto& report : reports)
        emit_report(report, cases, paths.reports() / report.run_id);

    json agg = {{"counts", aggregate.counts}, {"mean", aggregate.mean}, {"stddev", aggregate.stddev}};
    write_file(paths.aggregate_file(), agg.dump(2) + "\n");
}

// ------------------------------------------------------------- diversity

inline void stage_diversity(const RunConfig& cfg, const RunPaths& paths) {
    auto transcripts = load_transcripts(paths);
    if (transcripts.empty())
        throw Error("no transcripts in " + paths.transcripts().string() + "; run generate first");
    fs::create_directories(paths.diversity());
    DiversityReport report = diversity_report(transcripts, cfg.diversity);

    auto opt = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };
    json j = {{"mtld", opt(report.mtld)},
              {"hdd", opt(report.hdd)},
              {"log_ttr", opt(report.log_ttr)},
              {"root_ttr", opt(report.root_ttr)},
              {"vocab", report.vocab_size},
              {"tokens", report.token_count},
              {"distinct_1", report.distinct.at(1)},
              {"distinct_2", report.distinct.at(2)},
              {"distinct_3", report.distinct.at(3)}};
    write_file(paths.diversity_json(), j.dump(2) + "\n");

    auto cell = [](const std::optional<double>& v) {
        if (!v) return std::string("n/a");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", *v);
        return std::string(buf);
    };
    std::string table = "mtld\thdd\tlog_ttr\troot_ttr\tvocab\ttokens\tdistinct_1\tdistinct_2\tdistinct_3\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s\t%s\t%s\t%s\t%zu\t%zu\t%.4f\t%.4f\t%.4f\n",
                  cell(report.mtld).c_str(), cell(report.hdd).c_str(), cell(report.log_ttr).c_str(),
                  cell(report.root_ttr).c_str(), report.vocab_size, report.token_count,
                  report.distinct.at(1), report.distinct.at(2), report.distinct.at(3));
    table += buf;
    write_file(paths.diversity_table(), table);
}

// ------------------------------------------------------------- report

inline void stage_report(const RunConfig& cfg, const RunPaths& paths) {
    if (!fs::exists(paths.aggregate_file()))
        throw Error("missing " + paths.aggregate_file().string() + "; run mine first");
    if (!fs::exists(paths.diversity_json()))
        throw Error("missing " + paths.diversity_json().string() + "; run diversity first");
    auto transcripts = load_transcripts(paths);
    json agg = json::parse(read_file(paths.aggregate_file()));
    json div = json::parse(read_file(paths.diversity_json()));

    int sentinel = 0, budget = 0, errors = 0;
    for (const auto& t : transcripts) {
        if (t.stop_reason == StopReason::Sentinel) ++sentinel;
        else if (t.stop_reason == StopReason::Budget) ++budget;
        else ++errors;
    }

    std::string md = "# Evaluation report\n\n";
    md += "Company: " + cfg.company_name + " (" + business_mode_name(cfg.attribute_mode) + ", " +
          ablation_name(cfg.ablation) + ")\n\n";
    md += "## Interactions\n\n";
    md += "- transcripts: " + std::to_string(transcripts.size()) + "\n";
    md += "- stopped by sentinel: " + std::to_string(sentinel) + "\n";
    md += "- stopped by budget: " + std::to_string(budget) + "\n";
    md += "- agent errors: " + std::to_string(errors) + "\n\n";
    md += "## Bugs\n\n";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "Unique bugs over %zu mining runs: %.2f +/- %.2f\n\n",
                  agg.at("counts").size(), agg.at("mean").get<double>(),
                  agg.at("stddev").get<double>());
    md += buf;
    md += "Per-run reports live in `reports/`.\n\n";
    md += "## Lexical diversity of simulated users\n\n";
    md += "| metric | value |\n|---|---|\n";
    for (const char* key : {"mtld", "hdd", "log_ttr", "root_ttr", "vocab", "tokens", "distinct_1",
                            "distinct_2", "distinct_3"}) {
        const json& v = div.at(key);
        std::string cell = v.is_null() ? "n/a" : (v.is_number_float() ? [&] {
            char b[32];
            std::snprintf(b, sizeof(b), "%.4f", v.get<double>());
            return std::string(b);
        }() : v.dump());
        md += std::string("| ") + key + " | " + cell + " |\n";
    }
    write_file(paths.report_md(), md);
}

}  // namespace sage
