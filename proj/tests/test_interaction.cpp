#include <catch2/catch_amalgamated.hpp>

#include "sage/interaction.hpp"
#include "sage/mock_provider.hpp"

using namespace sage;

namespace {
Gateway scripted(std::uint64_t seed, json script) {
    ProviderBinding binding;
    binding.kind = ProviderKind::Mock;
    binding.seed = seed;
    return Gateway(binding, std::make_shared<MockProvider>(seed, std::move(script)));
}

json sim_script(int stop_after) {
    json script;
    script["rules"] = json::array({json{{"match", "You are a customer interacting with an agent"},
                                        {"action", "user_sim"},
                                        {"stop_after", stop_after}}});
    script["fallback"] = "error";
    return script;
}

TaskScenario tiny_scenario() {
    UserGoal goal{"g0", "As a customer, you want the agent to explain pricing", {}};
    KnowledgePiece piece{"FAQ/faq#7", "FAQ", "Q: lease?\nA: Monthly leasing starts at $450.", {}, 1};
    UserProfile profile{{}, "You are June Park who is agreeable, open to experience, conscientious, "
                            "introverted, and emotionally stable."};
    auto s = build_scenario(goal, piece, profile, "Sprocket sells robots.");
    s.id = "scn-0000";
    s.seed = 99;
    return s;
}

RequestOptions opts;
}  // namespace

TEST_CASE("sentinel recognition is standalone-only with whitespace tolerance") {
    CHECK(is_sentinel("###STOP###"));
    CHECK(is_sentinel("  ###STOP###\n"));
    CHECK_FALSE(is_sentinel("I think ###STOP### maybe"));
    CHECK_FALSE(is_sentinel("###STOP"));
    CHECK_FALSE(is_sentinel(""));
}

TEST_CASE("simulator role mapping inverts speakers") {
    auto scenario = tiny_scenario();
    std::vector<Turn> history = {{0, Speaker::User, "sim asks", 0}, {1, Speaker::Agent, "agent answers", 0}};
    json script;
    script["rules"] = json::array({json{{"match", "assistant: sim asks"}, {"respond", "mapping ok"}}});
    script["fallback"] = "error";
    auto gw = scripted(1, script);
    // the simulator's own turn arrives as assistant, the agent's as user; the
    // error fallback would fire if the mapping were wrong
    CHECK(user_turn(scenario, history, gw, opts) == "mapping ok");
}

TEST_CASE("budget stop: exactly budget user turns, strict alternation, zero local latency") {
    auto scenario = tiny_scenario();
    auto gw = scripted(101, sim_script(100));  // never reaches the sentinel
    EchoAdapter echo;
    auto t = run_interaction(scenario, echo, 3, gw, opts);
    CHECK(t.stop_reason == StopReason::Budget);
    CHECK(t.user_turn_count() == 3);
    REQUIRE(t.turns.size() == 6);
    for (std::size_t i = 0; i < t.turns.size(); ++i) {
        CHECK(t.turns[i].index == static_cast<int>(i));
        CHECK(t.turns[i].speaker == (i % 2 == 0 ? Speaker::User : Speaker::Agent));
        CHECK(t.turns[i].latency_ms == 0);
    }
    // echo agent repeats each user message
    CHECK(t.turns[1].content == t.turns[0].content);
    CHECK(t.turns[3].content == t.turns[2].content);
    CHECK(t.scenario_id == "scn-0000");
    CHECK(t.seed == 99);

    CHECK_THROWS_AS(run_interaction(scenario, echo, 0, gw, opts), PreconditionError);
}

TEST_CASE("sentinel at user message m stores m-1 user turns and is never persisted") {
    auto scenario = tiny_scenario();
    auto gw = scripted(101, sim_script(3));  // third simulator message is the sentinel
    EchoAdapter echo;
    auto t = run_interaction(scenario, echo, 10, gw, opts);
    CHECK(t.stop_reason == StopReason::Sentinel);
    CHECK(t.user_turn_count() == 2);
    CHECK(t.turns.size() == 4);
    for (const auto& turn : t.turns) CHECK_FALSE(is_sentinel(turn.content));
}

TEST_CASE("an embedded sentinel is stored verbatim and does not terminate") {
    auto scenario = tiny_scenario();
    json script;
    script["rules"] = json::array({
        json{{"match", "user: I think ###STOP###"}, {"respond", "###STOP###"}},
        json{{"match", "You are a customer"}, {"respond", "I think ###STOP### maybe"}},
    });
    script["fallback"] = "error";
    auto gw = scripted(1, script);
    EchoAdapter echo;
    auto t = run_interaction(scenario, echo, 10, gw, opts);
    CHECK(t.stop_reason == StopReason::Sentinel);
    REQUIRE(t.turns.size() == 2);
    CHECK(t.turns[0].content == "I think ###STOP### maybe");  // embedded, kept verbatim
    CHECK(t.turns[1].content == "I think ###STOP### maybe");
}

TEST_CASE("faq adapter answers by bidirectional substring match") {
    FaqLookupAdapter faq({{"How long does charging take?", "About 5.5 hours."},
                          {"warranty", "Two years."}});
    auto ask = [&](const std::string& q) {
        return faq.reply({{0, Speaker::User, q, 0}});
    };
    CHECK(ask("tell me about the WARRANTY please") == "Two years.");
    CHECK(ask("charging") == "About 5.5 hours.");  // query inside the stored question
    CHECK(ask("do you ship to mars?") == "I don't know");
    CHECK(faq.reply({}) == "I don't know");
}

TEST_CASE("flaky adapter is a deterministic coin over (seed, last message)") {
    auto inner = std::make_shared<EchoAdapter>();
    FlakyAdapter always_planted(inner, 0.0, 11, "The planted wrong fact.");
    FlakyAdapter never_planted(inner, 1.0, 11, "The planted wrong fact.");
    std::vector<Turn> history = {{0, Speaker::User, "what about charging?", 0}};
    CHECK(always_planted.reply(history) == "The planted wrong fact.");
    CHECK(never_planted.reply(history) == "what about charging?");

    FlakyAdapter a(inner, 0.5, 11, "planted");
    FlakyAdapter b(inner, 0.5, 11, "planted");
    FlakyAdapter c(inner, 0.5, 12, "planted");
    bool any_diff = false;
    for (int i = 0; i < 32; ++i) {
        std::vector<Turn> h = {{0, Speaker::User, "question " + std::to_string(i), 0}};
        CHECK(a.reply(h) == b.reply(h));  // same seed, same coin
        if (a.reply(h) != c.reply(h)) any_diff = true;
    }
    CHECK(any_diff);  // different seeds flip at least one coin

    CHECK_THROWS_AS(FlakyAdapter(inner, 1.5, 1, "x"), PreconditionError);
}

namespace {
class ThrowingAdapter : public AgentAdapter {
public:
    std::string reply(const std::vector<Turn>&) override { throw Error("agent exploded"); }
    std::string description() const override { return "throwing"; }
};
}  // namespace

TEST_CASE("adapter failure ends the interaction as agent_error keeping the dangling user turn") {
    auto scenario = tiny_scenario();
    auto gw = scripted(101, sim_script(100));
    ThrowingAdapter boom;
    auto t = run_interaction(scenario, boom, 5, gw, opts);
    CHECK(t.stop_reason == StopReason::AgentError);
    REQUIRE(t.turns.size() == 1);
    CHECK(t.turns[0].speaker == Speaker::User);
}

TEST_CASE("simulator gateway failure also maps to agent_error") {
    auto scenario = tiny_scenario();
    json script;
    script["fallback"] = "error";
    auto gw = scripted(1, script);
    EchoAdapter echo;
    auto t = run_interaction(scenario, echo, 5, gw, opts);
    CHECK(t.stop_reason == StopReason::AgentError);
    CHECK(t.turns.empty());
}

TEST_CASE("interactions are byte-deterministic under fixed seeds") {
    auto scenario = tiny_scenario();
    auto inner = std::make_shared<EchoAdapter>();
    FlakyAdapter flaky(inner, 0.5, 11, "The planted wrong fact.");
    auto gw1 = scripted(101, sim_script(4));
    auto gw2 = scripted(101, sim_script(4));
    auto t1 = run_interaction(scenario, flaky, 6, gw1, opts);
    auto t2 = run_interaction(scenario, flaky, 6, gw2, opts);
    REQUIRE(t1.turns.size() == t2.turns.size());
    for (std::size_t i = 0; i < t1.turns.size(); ++i)
        CHECK(t1.turns[i].content == t2.turns[i].content);
    CHECK(t1.stop_reason == t2.stop_reason);
}
