#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "sage/pipeline.hpp"

using namespace sage;

namespace {
const std::string kFixtures = SAGE_FIXTURES;

RunConfig fixture_config() { return load_config(kFixtures + "/config_mock.json"); }

RunPaths temp_run(const std::string& name) {
    RunPaths paths{std::filesystem::temp_directory_path() / "sage-pipeline-tests" / name};
    std::filesystem::remove_all(paths.root);
    return paths;
}

std::vector<std::string> all_run_files(const RunPaths& paths) {
    std::vector<std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(paths.root))
        if (entry.is_regular_file()) out.push_back(entry.path().string());
    std::sort(out.begin(), out.end());
    return out;
}
}  // namespace

TEST_CASE("config validation collects one diagnostic per problem") {
    json j = json::parse(read_file(kFixtures + "/config_mock.json"));
    CHECK(validate_config_json(j, kFixtures).empty());

    json broken = j;
    broken.erase("company");
    broken["attribute_mode"] = "B2X";
    broken["ablation"] = "half";
    broken["knowledge_sources"][0]["path"] = "missing.jsonl";
    broken["adapter"]["p"] = 3.0;
    broken["budget"] = 0;
    broken["judge_threshold"] = 9;
    broken["providers"].erase("miner");
    auto diags = validate_config_json(broken, kFixtures);
    auto has = [&](const std::string& needle) {
        for (const auto& d : diags)
            if (contains(d, needle)) return true;
        return false;
    };
    CHECK(has("missing required key 'company'"));
    CHECK(has("attribute_mode must be B2B or B2C"));
    CHECK(has("unknown ablation"));
    CHECK(has("does not exist"));
    CHECK(has("adapter.p must be in [0,1]"));
    CHECK(has("budget must be >= 1"));
    CHECK(has("judge_threshold must be in [1,4]"));
    CHECK(has("providers.miner is missing"));
    CHECK(diags.size() >= 8);
}

TEST_CASE("config loading resolves paths and fills defaults") {
    auto cfg = fixture_config();
    CHECK(cfg.company_name == "Sprocket Robotics");
    CHECK(cfg.attribute_mode == BusinessMode::B2B);
    CHECK(cfg.ablation == Ablation::Full);
    REQUIRE(cfg.knowledge_sources.size() == 3);
    CHECK(fs::exists(cfg.knowledge_sources[0].path));
    CHECK(cfg.simulator.binding.kind == ProviderKind::Mock);
    CHECK(fs::exists(cfg.simulator.binding.script_path));
    CHECK(cfg.budget == 4);
    CHECK(cfg.judge_threshold == 2);
    CHECK(cfg.mining.runs == 3);
    CHECK(cfg.resample_budget == 5);  // default
    CHECK(cfg.diversity.mtld_threshold == 0.72);
    CHECK(cfg.diversity.hdd_sample_size == 42);
    CHECK(cfg.adapter.kind == "flaky");
    CHECK(cfg.snapshot == read_file(kFixtures + "/config_mock.json"));
}

TEST_CASE("the validate subcommand reports ok or diagnostics") {
    std::string cli = SAGE_CLI;
    CHECK(std::system((cli + " validate --config " + kFixtures + "/config_mock.json >/dev/null").c_str()) == 0);
    // a config with problems exits non-zero
    auto bad_path = std::filesystem::temp_directory_path() / "sage-bad-config.json";
    json j = json::parse(read_file(kFixtures + "/config_mock.json"));
    j["budget"] = 0;
    write_file(bad_path, j.dump());
    CHECK(std::system((cli + " validate --config " + bad_path.string() + " 2>/dev/null").c_str()) != 0);
    std::filesystem::remove(bad_path);
}

TEST_CASE("generate persists scenarios, transcripts, and a frozen config snapshot") {
    auto cfg = fixture_config();
    auto paths = temp_run("generate");
    stage_generate(cfg, paths, 6);

    CHECK(read_file(paths.config_snapshot()) == cfg.snapshot);
    auto scenario_files = sorted_files(paths.scenarios(), ".json");
    auto transcript_files = sorted_files(paths.transcripts(), ".json");
    REQUIRE(scenario_files.size() == 6);
    REQUIRE(transcript_files.size() == 6);

    std::set<std::string> goal_ids;
    std::set<std::string> ids;
    for (const auto& file : scenario_files) {
        auto s = scenario_from_json(json::parse(read_file(file)));
        CHECK(ids.insert(s.id).second);  // no duplicate scenario ids
        goal_ids.insert(s.goal.id);
        CHECK_FALSE(s.system_prompt.empty());
        CHECK_FALSE(s.knowledge.id.empty());
        CHECK(starts_with(s.profile.rendered, "You are "));
        CHECK(s.seed == fnv1a64(s.id, cfg.seed));
    }
    CHECK(goal_ids.size() == 4);  // 6 scenarios cycle over 4 goals

    for (const auto& file : transcript_files) {
        auto t = transcript_from_json(json::parse(read_file(file)));
        CHECK(t.stop_reason == StopReason::Sentinel);  // sim script stops after 2 answers
        CHECK(t.user_turn_count() == 2);
        for (const auto& turn : t.turns) CHECK(turn.latency_ms == 0);
    }
}

TEST_CASE("an interrupted run resumes without duplicating or rewriting scenarios") {
    auto cfg = fixture_config();
    auto paths = temp_run("resume");
    stage_generate(cfg, paths, 6);
    auto before_scn = read_file(paths.scenario_file("scn-0004"));
    auto before_tx = read_file(paths.transcript_file("scn-0004"));

    // simulate an interrupt: one transcript lost, one scenario+transcript pair lost
    fs::remove(paths.transcript_file("scn-0002"));
    fs::remove(paths.scenario_file("scn-0005"));
    fs::remove(paths.transcript_file("scn-0005"));
    stage_generate(cfg, paths, 6);

    CHECK(sorted_files(paths.scenarios(), ".json").size() == 6);
    CHECK(sorted_files(paths.transcripts(), ".json").size() == 6);
    CHECK(read_file(paths.scenario_file("scn-0004")) == before_scn);  // untouched survivors
    CHECK(read_file(paths.transcript_file("scn-0004")) == before_tx);
    auto recovered = transcript_from_json(json::parse(read_file(paths.transcript_file("scn-0002"))));
    CHECK(recovered.user_turn_count() == 2);
}

TEST_CASE("stages demand their prerequisites by name") {
    auto cfg = fixture_config();
    auto paths = temp_run("prereq");
    CHECK_THROWS_WITH(stage_evaluate(cfg, paths), Catch::Matchers::ContainsSubstring("run generate first"));
    CHECK_THROWS_WITH(stage_mine(cfg, paths), Catch::Matchers::ContainsSubstring("run evaluate first"));
    CHECK_THROWS_WITH(stage_diversity(cfg, paths), Catch::Matchers::ContainsSubstring("run generate first"));
    stage_generate(cfg, paths, 2);
    stage_evaluate(cfg, paths);
    stage_diversity(cfg, paths);
    CHECK_THROWS_WITH(stage_report(cfg, paths), Catch::Matchers::ContainsSubstring("run mine first"));
}

TEST_CASE("the full mock pipeline produces coherent artifacts") {
    auto cfg = fixture_config();
    auto paths = temp_run("full");
    stage_generate(cfg, paths, 6);
    stage_evaluate(cfg, paths);
    stage_mine(cfg, paths);
    stage_diversity(cfg, paths);
    stage_report(cfg, paths);

    // every agent turn of every transcript got all five scores
    int agent_turns = 0;
    for (const auto& t : load_transcripts(paths))
        for (const auto& turn : t.turns)
            if (turn.speaker == Speaker::Agent) ++agent_turns;
    int eval_lines = 0;
    for (const auto& line : split_lines(read_file(paths.evaluations_file()))) {
        if (trim(line).empty()) continue;
        ++eval_lines;
        auto j = json::parse(line);
        REQUIRE(j.contains("scores"));
        CHECK(j["scores"].size() == 5);
    }
    CHECK(eval_lines == agent_turns);

    auto aggregate = json::parse(read_file(paths.aggregate_file()));
    CHECK(aggregate["counts"].size() == 3);
    CHECK(aggregate["stddev"].get<double>() == 0.0);  // canned miner is run-invariant

    auto div = json::parse(read_file(paths.diversity_json()));
    CHECK(div["tokens"].get<int>() > 0);
    CHECK(contains(read_file(paths.diversity_table()), "mtld\thdd"));

    auto report = read_file(paths.report_md());
    CHECK(contains(report, "Sprocket Robotics"));
    CHECK(contains(report, "transcripts: 6"));
    CHECK(contains(report, "## Lexical diversity"));
}

TEST_CASE("mine with a single run reports zero standard deviation") {
    auto cfg = fixture_config();
    cfg.mining.runs = 1;
    auto paths = temp_run("mine1");
    stage_generate(cfg, paths, 3);
    stage_evaluate(cfg, paths);
    stage_mine(cfg, paths);
    auto aggregate = json::parse(read_file(paths.aggregate_file()));
    CHECK(aggregate["counts"].size() == 1);
    CHECK(aggregate["stddev"].get<double>() == 0.0);
}

TEST_CASE("ablations change exactly what they claim") {
    auto cfg = fixture_config();
    CorpusIndex corpus = load_corpus(cfg.knowledge_sources);
    std::vector<std::string> icp_keys;
    for (const auto& s : default_attribute_schemas(cfg.attribute_mode))
        if (s.group == AttributeGroup::Icp) icp_keys.push_back(s.key);

    auto scenario_texts = [&](const RunPaths& paths) {
        std::vector<std::pair<json, std::string>> out;
        for (const auto& file : sorted_files(paths.scenarios(), ".json"))
            out.emplace_back(json::parse(read_file(file)), read_file(file));
        return out;
    };
    auto has_icp_key = [&](const json& record) {
        for (const auto& pair : record["attributes"])
            for (const auto& key : icp_keys)
                if (pair[0] == key) return true;
        return false;
    };
    auto has_piece_content = [&](const std::string& text) {
        for (const auto& [_, pieces] : corpus.categories)
            for (const auto& p : pieces)
                if (contains(text, json(p.content).dump().substr(1, 20))) return true;
        return false;
    };

    auto full = temp_run("ablation-full");
    stage_generate(cfg, full, 3);
    for (const auto& [record, text] : scenario_texts(full)) {
        CHECK(has_icp_key(record));
        CHECK_FALSE(record["knowledge_id"].get<std::string>().empty());
    }

    cfg.ablation = Ablation::NoIcp;
    auto no_icp = temp_run("ablation-no-icp");
    stage_generate(cfg, no_icp, 3);
    for (const auto& [record, text] : scenario_texts(no_icp)) {
        CHECK_FALSE(has_icp_key(record));
        CHECK_FALSE(record["knowledge_id"].get<std::string>().empty());  // knowledge kept
    }

    cfg.ablation = Ablation::NoAgentInfra;
    auto no_infra = temp_run("ablation-no-infra");
    stage_generate(cfg, no_infra, 3);
    stage_evaluate(cfg, no_infra);  // grounding falls back to the corporate summary
    for (const auto& [record, text] : scenario_texts(no_infra)) {
        CHECK(has_icp_key(record));  // attributes kept
        CHECK(record["knowledge_id"].get<std::string>().empty());
        CHECK_FALSE(has_piece_content(text));
        CHECK(contains(text, "Sprocket Robotics sells and leases"));  // summary grounds instead
    }
}

TEST_CASE("no credential value ever lands in run artifacts") {
    setenv("SAGE_TEST_API_KEY", "sk-credential-canary-9f2", 1);
    auto cfg = fixture_config();
    auto paths = temp_run("credscan");
    stage_generate(cfg, paths, 4);
    stage_evaluate(cfg, paths);
    stage_mine(cfg, paths);
    stage_diversity(cfg, paths);
    stage_report(cfg, paths);
    for (const auto& file : all_run_files(paths))
        CHECK_FALSE(contains(read_file(file), "sk-credential-canary-9f2"));
    unsetenv("SAGE_TEST_API_KEY");
}
