#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sage/gateway.hpp"
#include "sage/prompts.hpp"
#include "sage/scenario.hpp"

namespace sage {

enum class Speaker { User, Agent };

inline std::string speaker_name(Speaker s) { return s == Speaker::User ? "user" : "agent"; }

struct Turn {
    int index = 0;
    Speaker speaker = Speaker::User;
    std::string content;
    long latency_ms = 0;
};

enum class StopReason { Sentinel, Budget, AgentError };

inline std::string stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::Sentinel: return "sentinel";
        case StopReason::Budget: return "budget";
        case StopReason::AgentError: return "agent_error";
    }
    return "agent_error";
}

struct Transcript {
    std::string scenario_id;
    std::vector<Turn> turns;
    StopReason stop_reason = StopReason::Budget;
    std::uint64_t seed = 0;

    int user_turn_count() const {
        int n = 0;
        for (const auto& t : turns)
            if (t.speaker == Speaker::User) ++n;
        return n;
    }
};

// Black-box view of the agent under test: it sees the running history and
// nothing of the scenario's knowledge or profile.
class AgentAdapter {
public:
    virtual ~AgentAdapter() = default;
    virtual std::string reply(const std::vector<Turn>& history) = 0;
    virtual std::string description() const = 0;
};

// The sentinel terminates only as the entire trimmed message.
inline bool is_sentinel(const std::string& message) {
    return trim(message) == prompts::kSentinel;
}

// Next simulator utterance. The simulator plays the assistant role, so agent
// turns map to user messages and earlier simulator turns to assistant ones.
inline std::string user_turn(const TaskScenario& scenario, const std::vector<Turn>& history,
                             const Gateway& gateway, const RequestOptions& opts) {
    std::vector<ChatMessage> messages;
    messages.push_back({Role::System, scenario.system_prompt});
    for (const auto& t : history) {
        messages.push_back({t.speaker == Speaker::Agent ? Role::User : Role::Assistant, t.content});
    }
    return gateway.complete(opts.request(std::move(messages)));
}

// Timing is only recorded for adapters that leave the process; local test
// doubles report zero so mock runs are byte-reproducible.
inline Transcript run_interaction(const TaskScenario& scenario, AgentAdapter& adapter, int budget,
                                  const Gateway& gateway, const RequestOptions& opts,
                                  bool measure_latency = false) {
    if (budget < 1) throw PreconditionError("turn budget must be >= 1");
    Transcript transcript;
    transcript.scenario_id = scenario.id;
    transcript.seed = scenario.seed;
    int users = 0;
    while (true) {
        std::string utterance;
        try {
            utterance = user_turn(scenario, transcript.turns, gateway, opts);
        } catch (const GatewayError&) {
            transcript.stop_reason = StopReason::AgentError;
            return transcript;
        }
        if (is_sentinel(utterance)) {
            transcript.stop_reason = StopReason::Sentinel;
            return transcript;
        }
        transcript.turns.push_back(
            {static_cast<int>(transcript.turns.size()), Speaker::User, utterance, 0});
        ++users;

        std::string answer;
        long latency = 0;
        try {
            auto t0 = std::chrono::steady_clock::now();
            answer = adapter.reply(transcript.turns);
            if (measure_latency)
                latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        } catch (const std::exception&) {
            transcript.stop_reason = StopReason::AgentError;
            return transcript;
        }
        transcript.turns.push_back(
            {static_cast<int>(transcript.turns.size()), Speaker::Agent, answer, latency});
        if (users >= budget) {
            transcript.stop_reason = StopReason::Budget;
            return transcript;
        }
    }
}

// ------------------------------------------------------------ test adapters

class EchoAdapter : public AgentAdapter {
public:
    std::string reply(const std::vector<Turn>& history) override {
        if (history.empty()) return "";
        return history.back().content;
    }
    std::string description() const override { return "echo: repeats the last user message"; }
};

class FaqLookupAdapter : public AgentAdapter {
public:
    explicit FaqLookupAdapter(std::map<std::string, std::string> entries)
        : entries_(std::move(entries)) {}

    std::string reply(const std::vector<Turn>& history) override {
        if (history.empty()) return "I don't know";
        const std::string query = to_lower(history.back().content);
        for (const auto& [question, answer] : entries_) {
            if (contains(query, to_lower(question)) || contains(to_lower(question), query))
                return answer;
        }
        return "I don't know";
    }
    std::string description() const override { return "faq_lookup: substring match over an FAQ map"; }

private:
    std::map<std::string, std::string> entries_;
};

// Answers through an inner adapter with probability p, else emits a planted
// wrong fact; the coin is a pure function of (seed, message) so replays and
// parallel schedules agree.
class FlakyAdapter : public AgentAdapter {
public:
    FlakyAdapter(std::shared_ptr<AgentAdapter> inner, double p, std::uint64_t seed,
                 std::string planted_fact)
        : inner_(std::move(inner)), p_(p), seed_(seed), planted_fact_(std::move(planted_fact)) {
        if (p_ < 0.0 || p_ > 1.0) throw PreconditionError("flaky adapter p must be in [0,1]");
    }

    std::string reply(const std::vector<Turn>& history) override {
        const std::string& last = history.empty() ? planted_fact_ : history.back().content;
        double coin = static_cast<double>(fnv1a64(last, seed_) >> 11) /
                      static_cast<double>(1ULL << 53);
        if (coin < p_) return inner_->reply(history);
        return planted_fact_;
    }
    std::string description() const override { return "flaky: correct with probability p, else a planted wrong fact"; }

    const std::string& planted_fact() const { return planted_fact_; }

private:
    std::shared_ptr<AgentAdapter> inner_;
    double p_;
    std::uint64_t seed_;
    std::string planted_fact_;
};

// Remote wire protocol: POST {history:[{speaker, content}]} -> {content};
// 60 s timeout, one retry.
class RemoteAdapter : public AgentAdapter {
public:
    explicit RemoteAdapter(std::string endpoint) : endpoint_(std::move(endpoint)) {}

    std::string reply(const std::vector<Turn>& history) override {
        json body;
        body["history"] = json::array();
        for (const auto& t : history)
            body["history"].push_back({{"speaker", speaker_name(t.speaker)}, {"content", t.content}});
        std::string payload = body.dump();
        std::string last_error;
        for (int attempt = 0; attempt < 2; ++attempt) {
            try {
                return post(payload);
            } catch (const std::exception& e) {
                last_error = e.what();
            }
        }
        throw Error("remote adapter failed: " + last_error);
    }
    std::string description() const override { return "remote agent at " + endpoint_; }

private:
    std::string post(const std::string& payload);
    std::string endpoint_;
};

}  // namespace sage
