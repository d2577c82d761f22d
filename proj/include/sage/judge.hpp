#pragma once

#include <array>
#include <string>
#include <vector>

#include "sage/gateway.hpp"
#include "sage/interaction.hpp"
#include "sage/prompts.hpp"

namespace sage {

enum class Dimension { Helpfulness, Coherence, Verbosity, Relevance, Faithfulness };

inline constexpr std::array<Dimension, 5> kAllDimensions = {
    Dimension::Helpfulness, Dimension::Coherence, Dimension::Verbosity, Dimension::Relevance,
    Dimension::Faithfulness};

inline std::string dimension_name(Dimension d) {
    switch (d) {
        case Dimension::Helpfulness: return "helpfulness";
        case Dimension::Coherence: return "coherence";
        case Dimension::Verbosity: return "verbosity";
        case Dimension::Relevance: return "relevance";
        case Dimension::Faithfulness: return "faithfulness";
    }
    return "helpfulness";
}

inline Dimension dimension_from_name(const std::string& name) {
    for (auto d : kAllDimensions)
        if (dimension_name(d) == name) return d;
    throw Error("unknown dimension: " + name);
}

inline const char* rubric_text(Dimension d) {
    switch (d) {
        case Dimension::Helpfulness: return prompts::kRubricHelpfulness;
        case Dimension::Coherence: return prompts::kRubricCoherence;
        case Dimension::Verbosity: return prompts::kRubricVerbosity;
        case Dimension::Relevance: return prompts::kRubricRelevance;
        case Dimension::Faithfulness: return prompts::kRubricFaithfulness;
    }
    return prompts::kRubricHelpfulness;
}

struct DimensionScore {
    Dimension dimension = Dimension::Helpfulness;
    int score = 0;  // 0..4
    std::string reason;
};

struct TurnEvaluation {
    std::string transcript_id;
    int turn_index = 0;  // agent turn
    std::vector<DimensionScore> scores;  // exactly five, one per dimension
};

struct FlaggedTurn {
    std::string transcript_id;
    int turn_index = 0;
    std::vector<DimensionScore> failing;  // non-empty, each score < threshold
};

inline std::string render_conversation(const Transcript& transcript, int through_turn) {
    std::string out;
    for (int i = 0; i <= through_turn; ++i) {
        const auto& t = transcript.turns[static_cast<std::size_t>(i)];
        out += (t.speaker == Speaker::User ? "User: " : "Assistant: ") + t.content + "\n";
    }
    if (!out.empty()) out.pop_back();
    return out;
}

// Every prompt is TASK_INSTRUCTION plus one dimension's rubric; faithfulness
// additionally receives the scenario's grounding knowledge.
inline std::string judge_prompt(Dimension d, const std::string& conversation,
                                const std::string& knowledge) {
    std::string prompt = prompts::kTaskInstruction;
    prompt += "\n";
    prompt += rubric_text(d);
    prompt += "\n\n";
    if (d == Dimension::Faithfulness) {
        prompt += replace_all(prompts::kJudgeKnowledgeBlock, "{knowledge}", knowledge);
        prompt += "\n";
    }
    prompt += replace_all(prompts::kJudgeConversationBlock, "{conversation}", conversation);
    return prompt;
}

inline TurnEvaluation score_turn(const Transcript& transcript, int turn_index,
                                 const std::string& knowledge, const Gateway& gateway,
                                 const RequestOptions& opts) {
    if (turn_index < 0 || turn_index >= static_cast<int>(transcript.turns.size()))
        throw PreconditionError("turn index out of range");
    if (transcript.turns[static_cast<std::size_t>(turn_index)].speaker != Speaker::Agent)
        throw PreconditionError("turn " + std::to_string(turn_index) + " is not an agent turn");

    const std::string conversation = render_conversation(transcript, turn_index);
    StructureSchema schema;
    FieldSpec score;
    score.kind = FieldSpec::Kind::Integer;
    score.min_value = 0;
    score.max_value = 4;
    schema.fields["score"] = score;
    schema.fields["reason"] = {FieldSpec::Kind::String};

    TurnEvaluation eval;
    eval.transcript_id = transcript.scenario_id;
    eval.turn_index = turn_index;
    for (auto d : kAllDimensions) {
        json parsed = gateway.complete_structured(
            opts.request({{Role::User, judge_prompt(d, conversation, knowledge)}}), schema);
        eval.scores.push_back(
            {d, parsed.at("score").get<int>(), parsed.at("reason").get<std::string>()});
    }
    return eval;
}

// A turn is flagged iff ANY dimension scored strictly below the threshold.
inline std::vector<FlaggedTurn> flag_low_turns(const std::vector<TurnEvaluation>& evaluations,
                                               int threshold = 2) {
    if (threshold < 1 || threshold > 4) throw PreconditionError("threshold must be in [1,4]");
    std::vector<FlaggedTurn> flagged;
    for (const auto& eval : evaluations) {
        FlaggedTurn f;
        f.transcript_id = eval.transcript_id;
        f.turn_index = eval.turn_index;
        for (const auto& s : eval.scores)
            if (s.score < threshold) f.failing.push_back(s);
        if (!f.failing.empty()) flagged.push_back(std::move(f));
    }
    return flagged;
}

}  // namespace sage
