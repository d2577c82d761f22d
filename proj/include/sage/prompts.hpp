#pragma once

#include <string>

namespace sage::prompts {

// ---------------------------------------------------------------- simulator

inline constexpr const char* kSimulatorSystem =
    R"PROMPT(You are a customer interacting with an agent. The agent is supplied by the following company:
{summary}
{profile}
You have the following goal when interacting with this agent:
{goal}
Here is the content that you might be interested in and might have questions about:
{knowledge}

Rules:
- Just generate one line at a time to simulate the user's message. Keep the response brief and concise.
- Do not give away all the instruction at once. Only provide the information that is necessary for the current step.
- Do not hallucinate information that is not provided in the instruction. For example, if the agent asks for the order id but it is not mentioned in the instruction, do not make up an order id, just say you do not remember or have it.
- If the instruction goal is satisified, generate '###STOP###' as a standalone message without anything else to end the conversation.
- Do not repeat the exact instruction in the conversation. Instead, use your own words to convey the same information.
- Try to personalize your question to the your background, such as job information, household, event or activities you did or going to do.
- Adjust your tone/style based on your personalities.
- As a customer, you tend to write short questions with occasional typos or incomplete sentences. Replicate the chitchat typing behavior of a human customer and begin the conversation with a question to achieve your goal.)PROMPT";

inline constexpr const char* kSentinel = "###STOP###";

// ------------------------------------------------------- profile construction

inline constexpr const char* kGenerateAttributes =
    R"PROMPT(Given the agent infrastructure knowledge, your task is to generate {num_personas} set of personal attributes for the new categories.

Examples:
########################
Generate 2 sets of attributes.
agent infrastructure knowledge:
{knowledge}

Here are new attribute descriptions that you need to generate values for:
business_type: The type of business or industry the individual is associated with, such as technology, finance, healthcare, retail, or manufacturing.
company_name: The name of the company or organization the individual is associated with.
job_information: Detailed information about the individual's professional roles, including their official job title, primary responsibilities, and total years of relevant work experience within the industry or field. Such as marketing manager with 7 years of experience in the industry, taking care of exploration and expansion of the market.
company_size: The size of the company or organization the individual is associated with, better with the number of employees.

Return:
{"attributes": [{"business_type": "commercial cleaning services", "company_name": "House Cleaner", "job_information": "Facilities Manager with 8 years of experience in commercial cleaning services, managing cleaning staff and implementing automation solutions", "company_size": "100-200 employees"}, {"business_type": "hospitality (hotels, bars, restaurants)", "company_name": "Lily Motel", "job_information": "Food & Beverage Director with 10 years of experience in hospitality, overseeing bar and restaurant operations and technology adoption", "company_size": "11-50 employees"}]}

Rules:
- You should return a JSON list of {num_personas} sets of attributes values.
- The result should be diverse and not repetitive.
- The attributes values should be aligned with the corporate overview.

########################
Generate {num_personas} sets of attributes.

agent infrastructure knowledge:
{knowledge}

Here are the categories that you need to generate values for, one value per category:
{category_description}

Return:)PROMPT";

inline constexpr const char* kValidateAttributes =
    R"PROMPT(Given a set of user attributes, your task is to check whether each pair of attributes is consistent. You should first generate the thought and then return the response "Yes" or "No" in JSON FORMAT.

Example:
########################
User attributes:
job_information: operations manager with 10 years of experience in hospitality, overseeing automation and service efficiency
business_type: commercial cleaning services
company_size: 11-50 employees
company_name: Caesars Entertainment

Return:
{
"thought": "a commercial cleaning services company will not name as Entertainment company",
"response": "No"
}

########################
User attributes:
customer_type: returning customer
deal_stage: new leads

Return:
{
    "thought": "a returning customer will not be a new leads",
    "response": "No"
}

########################
User attributes:
{user_attributes}

Return:)PROMPT";

inline constexpr const char* kRenderProfile =
    R"PROMPT(Given a list of user attributes, your task is to convert them into a natural language description of a user profile.

Rules:
- Write the response in the second person.
- Begin the profile with: "You are <name> who is <TRAIT 1, ..., TRAIT 5>.", where [TRAIT 1, ..., TRAIT 5] represents the assigned Big Five personality traits.
- Do not add any prefixes such as "Profile:" or "Customer Profile:".

User attributes:
{user_attr}

Profile:)PROMPT";

// ------------------------------------------------------------------- judging

inline constexpr const char* kTaskInstruction =
    R"PROMPT(Given a conversation between a user and an AI assistant, your task is to evaluate the last message from the AI assistant according to the criteria below, assigning a score from 0 to 4. Follow the detailed descriptions to guide your assessment. Return the score and reasoning in JSON FORMAT.

Format:
{
    "score": <integer 0-4>,
    "reason": "<reasoning>"
}
)PROMPT";

inline constexpr const char* kRubricHelpfulness =
    R"PROMPT(Helpfulness:
Description: Determine the effectiveness and value of the AI assistant's responses in the last message in addressing the user's needs.
Evaluation Criteria:
- 4 - The response is extremely helpful and completely aligned with the spirit of what the prompt was asking for.
- 3 - The response is mostly helpful and mainly aligned with what the user was looking for, but there is still some room for improvement.
- 2 - The response is partially helpful but misses the overall goal of the user's query/input in some way. The response did not fully satisfy what the user was looking for.
- 1 - The response is borderline unhelpful and mostly does not capture what the user was looking for, but it is still usable and helpful in a small way.
- 0 - The response is not useful or helpful at all. The response completely missed the essence of what the user wanted.)PROMPT";

inline constexpr const char* kRubricCoherence =
    R"PROMPT(Coherence:
Description: Determine the logical flow and consistency of the AI assistant's responses in the last message.
Evaluation Criteria:
- 4 (Perfectly Coherent and Clear) - The response is perfectly clear and self-consistent throughout. There are no contradictory assertions or statements, the writing flows logically and following the train of thought/story is not challenging.
- 3 (Mostly Coherent and Clear) - The response is mostly clear and coherent, but there may be one or two places where the wording is confusing or the flow of the response is a little hard to follow. Over all, the response can mostly be followed with a little room for improvement.
- 2 (A Little Unclear and/or Incoherent) - The response is a little unclear. There are some inconsistencies or contradictions, run on sentences, confusing statements, or hard to follow sections of the response.
- 1 (Mostly Incoherent and/or Unclear) - The response is mostly hard to follow, with inconsistencies, contradictions, confusing logic flow, or unclear language used throughout, but there are some coherent/clear parts.
- 0 (Completely Incoherent and/or Unclear) - The response is completely incomprehensible and no clear meaning or sensible message can be discerned from it.)PROMPT";

inline constexpr const char* kRubricVerbosity =
    R"PROMPT(Verbosity:
Description: How concise is the last message from the AI assistant. Does it use more words than needed?
Evaluation Criteria:
- 4 (Verbose) - The response is particularly lengthy, wordy, and/or extensive with extra details given what the prompt requested from the assistant model. The response can be verbose regardless of if the length is due to repetition and incoherency or if it is due to rich and insightful detail.
- 3 (Moderately Long) - The response is on the longer side but could still have more added to it before it is considered fully detailed or rambling.
- 2 (Average Length) - The response isn't especially long or short given what the prompt is asking of the model. The length is adequate for conveying a full response but isn't particularly wordy nor particularly concise.
- 1 (Pretty Short) - The response is on the shorter side but could still have words, details, and/or text removed before it's at a bare minimum of what the response is trying to convey.
- 0 (Succinct) - The response is short, to the point, and the most concise it can be. No additional information is provided outside of what is requested by the prompt (regardless of if the information or response itself is incorrect, hallucinated, or misleading. A response that gives an incorrect answer can still be succinct.).)PROMPT";

inline constexpr const char* kRubricRelevance =
    R"PROMPT(Relevance:
Description: How much the last message from the AI assistant is addressing the question/input from the customer and to what degree?
Evaluation Criteria:
- 4 (Very Relevant) - The response is addressing the input question in its entirety, and just the question.
- 3 (Additional information) - The response is fully addressing the question, but also providing information not directly related to the question alongside.
- 2 (Partially Relevant) - The response is partially addressing the question i.e., only a part of the question is addressed.
- 1 (Pretty Short) - The response only address small portion of the question.
- 0 (Not Relevant) - The response is not relevant to the user's query/input at all.)PROMPT";

inline constexpr const char* kRubricFaithfulness =
    R"PROMPT(Faithfulness:
Description: How accurate/factual the answer seems to be, based on: provided knowledge content and majorly agreed common knowledge.
Evaluation Criteria:
- 4 - The response is completely correct and faithfulness to the knowledge with no necessary details missing and without false, misleading, or hallucinated information. If the prompt asks the assistant to do a task, the task is completely done and addressed in the response.
- 3 - The response is mostly correct and faithfulness to the knowledge with a small amount of missing information. It contains no misleading information or hallucinations. If the prompt asks the assistant to perform a task, the task is mostly successfully attempted.
- 2 - The response contains a mix of correct and incorrect information. The response may miss some details, contain misleading information, or minor hallucinations, but is more or less aligned with what the prompt asks for. If the prompt asks the assistant to perform a task, the task is attempted with moderate success but still has clear room for improvement.
- 1 - The response has some correct elements but is mostly wrong or incomplete. The response may contain multiple instances of hallucinations, false information, misleading information, or irrelevant information. If the prompt asks the assistant to do a task, the task was attempted with a small amount of success.
- 0 - The response is completely incorrect. All information provided is wrong, false or hallucinated. If the prompt asks the assistant to do a task, the task is not at all attempted, or the wrong task was attempted in the response. The response is completely irrelevant to the prompt.)PROMPT";

inline constexpr const char* kJudgeKnowledgeBlock =
    R"PROMPT(Here is the knowledge that assistant's response should be grounded:
{knowledge}
)PROMPT";

inline constexpr const char* kJudgeConversationBlock =
    R"PROMPT(Here is the conversation between user and AI assistant:
{conversation}

Evaluation Form:)PROMPT";

// ---------------------------------------------------------------- bug mining

inline constexpr const char* kCategorizeFailures =
    R"PROMPT(Given the failure cases from user-agent interactions, your task is to categorize them into high-level failure categories.

Rules:
- For each case, first provide a short reasoning statement ("thought") explaining why the case belongs to a particular category.
- Assign a concise and meaningful name to the high-level failure category.
- Provide a clear description that characterizes the nature of this category.
- Return the final output strictly in JSON format.

Format:
{"errors": [{"thought": "<brief reasoning for the categorization>", "high_level_error_category": "<name of the category>", "description": "<definition of the category>"}]}

Failure cases:
{items}

Return:)PROMPT";

inline constexpr const char* kDedupeFailures =
    R"PROMPT(Given the failure cases from user-agent interactions, and the high-level failure categories, your task is to deduplicate these failure cases and identity fine-grained unique errors under each high-level failure category.

Rules:
- Do not follow the error types from "helpfulness", "coherence", "verbosity", "faithfulness", "relevance" anymore. Instead, concentrate specifically on the agent's behavior. For example, identify which specific pieces of information are missing. Each missing piece of information should be treated as a separate unique error.
- Return the error types in the JSON format, where high_level_error_category is one of the high-level error categories from the choice list, unique_error_description is the description of the unique error, example is item_id corresponding to that unique error.

Format:
{"unique_errors": [{"high_level_error_category": "<high-level error category name>", "unique_error_description": "<unique_error_description>", "example": ["<item_id1>, <item_id2>, ..."]}]}

High-level failure categories:
{high_level_failure_categories}

Failure cases:
{items}

Return:)PROMPT";

// ---------------------------------------------- goal and category selection

inline constexpr const char* kDeriveGoal =
    R"PROMPT(Given an agent capability that a business wants to evaluate, your task is to translate the capability into a corresponding user goal. The user goal defines the objective of a customer interacting with the agent, written in the second person.

Return the result in JSON FORMAT: {"goal": "<user goal>"}

Capability:
{capability}

Return:)PROMPT";

inline constexpr const char* kSelectCategories =
    R"PROMPT(Given a user goal, your task is to identify which of the following knowledge categories are relevant to the goal. Return only category names from the list.

Return the result in JSON FORMAT: {"categories": ["<category name>", ...]}

Categories:
{categories}

User goal:
{goal}

Return:)PROMPT";

}  // namespace sage::prompts
