#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdio>

#include "lexdiv_oracle.hpp"
#include "sage/pipeline.hpp"

using namespace sage;

// One line per acceptance criterion so a log scan shows the verdicts directly.
namespace {
class CriterionReporter : public Catch::EventListenerBase {
public:
    using EventListenerBase::EventListenerBase;
    void testCaseEnded(const Catch::TestCaseStats& stats) override {
        std::printf("[%s] %s\n", stats.totals.assertions.allOk() ? "PASS" : "FAIL",
                    stats.testInfo->name.c_str());
        std::fflush(stdout);
    }
};
}  // namespace
CATCH_REGISTER_LISTENER(CriterionReporter)

namespace {
const std::string kFixtures = SAGE_FIXTURES;

RunPaths run_dir(const std::string& name) {
    return RunPaths{std::filesystem::temp_directory_path() / "sage-acceptance" / name};
}

void run_all_stages(const RunConfig& cfg, const RunPaths& paths, std::size_t n) {
    std::filesystem::remove_all(paths.root);
    stage_generate(cfg, paths, n);
    stage_evaluate(cfg, paths);
    stage_mine(cfg, paths);
    stage_diversity(cfg, paths);
    stage_report(cfg, paths);
}

std::map<std::string, std::string> files_with_bytes(const RunPaths& paths) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(paths.root))
        if (entry.is_regular_file())
            out[fs::relative(entry.path(), paths.root).string()] = read_file(entry.path());
    return out;
}

// criteria 6 and 7 inspect the same end-to-end artifacts
const RunPaths& ensure_e2e_run() {
    static RunPaths paths = run_dir("e2e-a");
    if (!fs::exists(paths.report_md())) {
        auto cfg = load_config(kFixtures + "/config_mock.json");
        run_all_stages(cfg, paths, 20);
    }
    return paths;
}
}  // namespace

TEST_CASE("criterion 1: diversity metrics match an independent brute-force oracle") {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 50 + rng() % 1951;
        std::size_t vocab = 15 + rng() % 250;
        std::vector<std::string> tokens;
        for (std::size_t i = 0; i < n; ++i)
            tokens.push_back("w" + std::to_string(std::min(rng() % vocab, rng() % vocab)));
        TokenStream stream;
        stream.tokens = tokens;

        REQUIRE(mtld(stream, 0.72) == Catch::Approx(oracle::mtld(tokens, 0.72)).margin(1e-9));
        auto h = hdd(stream, 42);
        REQUIRE(h.has_value());
        REQUIRE(*h == Catch::Approx(oracle::hdd(tokens, 42)).margin(1e-9));
        auto fam = ttr_family(stream);
        REQUIRE(fam.vocab_size == oracle::vocab(tokens));
        REQUIRE(*fam.log_ttr == Catch::Approx(oracle::log_ttr(tokens)).margin(1e-9));
        REQUIRE(*fam.root_ttr == Catch::Approx(oracle::root_ttr(tokens)).margin(1e-9));
        for (int g = 1; g <= 3; ++g)
            REQUIRE(distinct_n(stream, g) == Catch::Approx(oracle::distinct_n({tokens}, g)).margin(1e-9));
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0).count();
    REQUIRE(ms < 5000);
}

TEST_CASE("criterion 2: flagging threshold 2 catches exactly scores 0 and 1") {
    std::vector<TurnEvaluation> evals;
    // every combination of one varying dimension over the full 0..4 range
    for (std::size_t d = 0; d < kAllDimensions.size(); ++d) {
        for (int score = 0; score <= 4; ++score) {
            TurnEvaluation e;
            e.transcript_id = "t" + std::to_string(d);
            e.turn_index = score * 2 + 1;
            for (std::size_t k = 0; k < kAllDimensions.size(); ++k)
                e.scores.push_back({kAllDimensions[k], k == d ? score : 4, "r"});
            evals.push_back(std::move(e));
        }
    }
    auto flagged = flag_low_turns(evals, 2);
    REQUIRE(flagged.size() == kAllDimensions.size() * 2);  // scores 0 and 1 only
    for (const auto& f : flagged) {
        REQUIRE(f.failing.size() == 1);
        REQUIRE(f.failing[0].score < 2);
    }
    // boundary: a turn scoring 2 everywhere never flags
    TurnEvaluation boundary;
    boundary.transcript_id = "b";
    boundary.turn_index = 1;
    for (auto d : kAllDimensions) boundary.scores.push_back({d, 2, "r"});
    REQUIRE(flag_low_turns({boundary}, 2).empty());
}

TEST_CASE("criterion 3: goal cycling gives each of 4 goals exactly 3 of 12 scenarios") {
    std::vector<UserGoal> goals;
    for (int i = 0; i < 4; ++i) goals.push_back({"goal-" + std::to_string(i), "g", {}});
    GoalCycle cycle(goals);
    std::map<std::string, int> counts;
    for (int i = 0; i < 12; ++i) ++counts[cycle.next_goal().id];
    REQUIRE(counts.size() == 4);
    for (const auto& [_, c] : counts) REQUIRE(c == 3);
}

TEST_CASE("criterion 4: a 5-piece cluster yields 5 distinct draws, then recycles") {
    CorpusIndex index;
    HashingEmbedder embedder(32, 5);
    for (int i = 0; i < 5; ++i) {
        KnowledgePiece p;
        p.id = "FAQ/x#" + std::to_string(i);
        p.category = "FAQ";
        p.content = "piece " + std::to_string(i) + " topic " + std::to_string(i * 31);
        p.embedding = embedder.embed(p.content);
        index.categories["FAQ"].push_back(p);
    }
    index.clusters["FAQ"] = cluster_category(index.categories["FAQ"], 1, 9);
    UsageState usage;
    std::mt19937_64 rng(4);
    Vec goal_emb = embedder.embed("a goal");
    std::set<std::string> drawn;
    for (int i = 0; i < 5; ++i)
        REQUIRE(drawn.insert(select_knowledge(goal_emb, index, {"FAQ"}, usage, rng).id).second);
    REQUIRE(drawn.size() == 5);
    REQUIRE(drawn.count(select_knowledge(goal_emb, index, {"FAQ"}, usage, rng).id) == 1);
}

TEST_CASE("criterion 5: sentinel and budget termination contract") {
    UserGoal goal{"g", "As a customer, you want pricing", {}};
    KnowledgePiece piece{"k", "FAQ", "Q: a?\nA: b.", {}, 1};
    UserProfile profile{{}, "You are June Park who is agreeable, open to experience, conscientious, "
                            "introverted, and emotionally stable."};
    auto scenario = build_scenario(goal, piece, profile, "Summary.");
    scenario.id = "scn-acc";
    EchoAdapter echo;
    RequestOptions opts;
    ProviderBinding binding;

    auto sim = [&](int stop_after) {
        json script;
        script["rules"] = json::array({json{{"match", "You are a customer"},
                                            {"action", "user_sim"},
                                            {"stop_after", stop_after}}});
        return Gateway(binding, std::make_shared<MockProvider>(101, script));
    };

    for (int m = 2; m <= 4; ++m) {  // sentinel at user message m -> m-1 stored user turns
        auto gw = sim(m);
        auto t = run_interaction(scenario, echo, 10, gw, opts);
        REQUIRE(t.stop_reason == StopReason::Sentinel);
        REQUIRE(t.user_turn_count() == m - 1);
        for (const auto& turn : t.turns) REQUIRE_FALSE(is_sentinel(turn.content));
    }
    {
        auto gw = sim(1000);  // never stops on its own
        auto t = run_interaction(scenario, echo, 5, gw, opts);
        REQUIRE(t.stop_reason == StopReason::Budget);
        REQUIRE(t.user_turn_count() == 5);
    }
    {
        json script;
        script["rules"] = json::array({
            json{{"match", "user: please ###STOP### now"}, {"respond", "###STOP###"}},
            json{{"match", "You are a customer"}, {"respond", "please ###STOP### now"}},
        });
        auto gw = Gateway(binding, std::make_shared<MockProvider>(1, script));
        auto t = run_interaction(scenario, echo, 10, gw, opts);
        REQUIRE(t.stop_reason == StopReason::Sentinel);
        REQUIRE(t.turns.size() == 2);  // the embedded sentinel did not terminate
        REQUIRE(t.turns[0].content == "please ###STOP### now");
    }
}

TEST_CASE("criterion 6: the mock end-to-end pipeline is byte-identical across executions") {
    auto t0 = std::chrono::steady_clock::now();
    auto cfg = load_config(kFixtures + "/config_mock.json");
    REQUIRE(cfg.adapter.kind == "flaky");
    REQUIRE(cfg.adapter.flaky_p == 0.5);
    REQUIRE(cfg.mining.runs == 3);

    const RunPaths& a = ensure_e2e_run();
    auto b = run_dir("e2e-b");
    run_all_stages(cfg, b, 20);

    auto files_a = files_with_bytes(a);
    auto files_b = files_with_bytes(b);
    REQUIRE(files_a.size() == files_b.size());
    REQUIRE(sorted_files(a.transcripts(), ".json").size() == 20);
    for (const auto& [rel, bytes] : files_a) {
        REQUIRE(files_b.count(rel) == 1);
        REQUIRE(files_b.at(rel) == bytes);
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0).count();
    REQUIRE(ms < 60000);
}

TEST_CASE("criterion 7: every mined bug resolves to persisted failure evidence") {
    const RunPaths& paths = ensure_e2e_run();

    std::set<std::pair<std::string, int>> flagged_turns;
    for (const auto& line : split_lines(read_file(paths.flagged_file()))) {
        if (trim(line).empty()) continue;
        auto j = json::parse(line);
        flagged_turns.insert({j["transcript_id"].get<std::string>(), j["turn_index"].get<int>()});
    }
    REQUIRE_FALSE(flagged_turns.empty());

    auto cases = json::parse(read_file(paths.failure_cases_file()));
    std::map<std::string, std::pair<std::string, int>> case_turns;
    int faithfulness_cases = 0;
    for (const auto& c : cases) {
        case_turns[c["item_id"].get<std::string>()] = {c["transcript_id"].get<std::string>(),
                                                       c["turn_index"].get<int>()};
        if (c["dimension"] == "faithfulness") ++faithfulness_cases;
    }
    REQUIRE(faithfulness_cases >= 1);  // the planted wrong fact surfaced

    int reports_checked = 0;
    for (const auto& file : sorted_files(paths.reports(), ".json")) {
        if (!starts_with(file.filename().string(), "mine-")) continue;
        ++reports_checked;
        auto report = json::parse(read_file(file));
        int category_total = 0;
        for (const auto& [_, count] : report["per_category_counts"].items())
            category_total += count.get<int>();
        REQUIRE(category_total == static_cast<int>(report["unique_bugs"].size()));
        for (const auto& bug : report["unique_bugs"]) {
            REQUIRE_FALSE(bug["examples"].empty());
            for (const auto& id : bug["examples"]) {
                // each example id resolves to a failure case on a flagged turn
                REQUIRE(case_turns.count(id.get<std::string>()) == 1);
                REQUIRE(flagged_turns.count(case_turns.at(id.get<std::string>())) == 1);
            }
        }
    }
    REQUIRE(reports_checked == 3);
}

TEST_CASE("criterion 8: ablations are visible in the persisted scenario records") {
    auto cfg = load_config(kFixtures + "/config_mock.json");
    CorpusIndex corpus = load_corpus(cfg.knowledge_sources);
    std::set<std::string> icp_keys;
    for (const auto& s : default_attribute_schemas(cfg.attribute_mode))
        if (s.group == AttributeGroup::Icp) icp_keys.insert(s.key);

    auto scan = [&](const RunPaths& paths, bool expect_icp, bool expect_knowledge) {
        auto files = sorted_files(paths.scenarios(), ".json");
        REQUIRE_FALSE(files.empty());
        for (const auto& file : files) {
            const std::string text = read_file(file);
            auto record = json::parse(text);
            bool any_icp = false;
            for (const auto& pair : record["attributes"])
                if (icp_keys.count(pair[0].get<std::string>())) any_icp = true;
            REQUIRE(any_icp == expect_icp);
            bool any_piece_content = false;
            for (const auto& [_, pieces] : corpus.categories)
                for (const auto& p : pieces) {
                    auto quoted = json(p.content).dump();
                    if (contains(text, quoted.substr(1, quoted.size() - 2))) any_piece_content = true;
                }
            REQUIRE(any_piece_content == expect_knowledge);
            REQUIRE(record["knowledge_id"].get<std::string>().empty() == !expect_knowledge);
        }
    };

    auto full = run_dir("ablation-full");
    std::filesystem::remove_all(full.root);
    stage_generate(cfg, full, 4);
    scan(full, true, true);

    cfg.ablation = Ablation::NoIcp;
    auto no_icp = run_dir("ablation-no-icp");
    std::filesystem::remove_all(no_icp.root);
    stage_generate(cfg, no_icp, 4);
    scan(no_icp, false, true);

    cfg.ablation = Ablation::NoAgentInfra;
    auto no_infra = run_dir("ablation-no-infra");
    std::filesystem::remove_all(no_infra.root);
    stage_generate(cfg, no_infra, 4);
    scan(no_infra, true, false);
}

TEST_CASE("criterion 9: bug-count aggregation reports mean 29.0 and population std sqrt(2)") {
    auto agg = aggregate_counts({29, 30, 28, 31, 27});
    REQUIRE(agg.mean == Catch::Approx(29.0).margin(1e-12));
    REQUIRE(agg.stddev == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
}
