#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sage/cluster.hpp"
#include "sage/embedding.hpp"
#include "sage/util.hpp"

#include <json.hpp>

namespace sage {

enum class AttributeKind { Predefined, Dynamic };
enum class AttributeGroup { Icp, Individual };
enum class BusinessMode { B2B, B2C };

inline std::string business_mode_name(BusinessMode m) { return m == BusinessMode::B2B ? "B2B" : "B2C"; }

struct AttributeSchema {
    std::string key;
    AttributeKind kind = AttributeKind::Predefined;
    AttributeGroup group = AttributeGroup::Icp;
    std::vector<std::string> values;  // predefined only
    std::string description;         // dynamic only, fed to the value-generation prompt

    void check() const {
        if (key.empty()) throw PreconditionError("attribute schema without key");
        if (kind == AttributeKind::Predefined && values.size() < 2)
            throw PreconditionError("predefined schema '" + key + "' needs >= 2 values");
        if (kind == AttributeKind::Dynamic && description.empty())
            throw PreconditionError("dynamic schema '" + key + "' needs a description");
    }
};

enum class CapabilityStage {
    NeedRecognition,
    InformationSearch,
    EvaluationOfAlternatives,
    PurchaseDecision,
    PostPurchase,
    Custom
};

inline std::string stage_name(CapabilityStage s) {
    switch (s) {
        case CapabilityStage::NeedRecognition: return "Need Recognition";
        case CapabilityStage::InformationSearch: return "Information Search";
        case CapabilityStage::EvaluationOfAlternatives: return "Evaluation of Alternatives";
        case CapabilityStage::PurchaseDecision: return "Purchase Decision";
        case CapabilityStage::PostPurchase: return "Post-Purchase Behavior";
        case CapabilityStage::Custom: return "Custom";
    }
    return "Custom";
}

struct CapabilitySpec {
    CapabilityStage stage = CapabilityStage::Custom;
    std::string statement;  // verb-object-constraint form
};

struct KnowledgePiece {
    std::string id;
    std::string category;
    std::string content;
    Vec embedding;        // unit-normalized once embedded
    int times_used = 0;   // mutated through UsageState, not through the index
};

struct CorpusIndex {
    // std::map keeps category iteration order stable across runs
    std::map<std::string, std::vector<KnowledgePiece>> categories;
    std::map<std::string, std::vector<Cluster>> clusters;

    std::size_t piece_count() const {
        std::size_t n = 0;
        for (const auto& [_, v] : categories) n += v.size();
        return n;
    }

    const KnowledgePiece* find(const std::string& id) const {
        for (const auto& [_, pieces] : categories)
            for (const auto& p : pieces)
                if (p.id == id) return &p;
        return nullptr;
    }
};

enum class SourceFormat { Faq, Table, Doc };

struct KnowledgeSource {
    std::string path;
    std::string category;
    SourceFormat format = SourceFormat::Doc;
};

namespace detail {

inline std::vector<std::string> parse_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') { cur += '"'; ++i; }
                else quoted = false;
            } else cur += c;
        } else if (c == '"') quoted = true;
        else if (c == ',') { out.push_back(cur); cur.clear(); }
        else cur += c;
    }
    out.push_back(cur);
    return out;
}

inline std::size_t whitespace_token_count(const std::string& s) {
    std::istringstream in(s);
    std::string tok;
    std::size_t n = 0;
    while (in >> tok) ++n;
    return n;
}

// Paragraph-aligned chunks capped at max_tokens whitespace tokens; an
// oversized single paragraph is sliced at token boundaries.
inline std::vector<std::string> chunk_document(const std::string& text, std::size_t max_tokens) {
    std::vector<std::string> paragraphs;
    std::string cur;
    for (const auto& line : split_lines(text)) {
        if (trim(line).empty()) {
            if (!trim(cur).empty()) paragraphs.push_back(trim(cur));
            cur.clear();
        } else {
            cur += line;
            cur += '\n';
        }
    }
    if (!trim(cur).empty()) paragraphs.push_back(trim(cur));

    std::vector<std::string> expanded;
    for (const auto& p : paragraphs) {
        if (whitespace_token_count(p) <= max_tokens) {
            expanded.push_back(p);
            continue;
        }
        std::istringstream in(p);
        std::string tok, slice;
        std::size_t n = 0;
        while (in >> tok) {
            if (n == max_tokens) {
                expanded.push_back(slice);
                slice.clear();
                n = 0;
            }
            if (!slice.empty()) slice += ' ';
            slice += tok;
            ++n;
        }
        if (!slice.empty()) expanded.push_back(slice);
    }

    std::vector<std::string> chunks;
    std::string chunk;
    std::size_t chunk_tokens = 0;
    for (const auto& p : expanded) {
        std::size_t t = whitespace_token_count(p);
        if (!chunk.empty() && chunk_tokens + t > max_tokens) {
            chunks.push_back(chunk);
            chunk.clear();
            chunk_tokens = 0;
        }
        if (!chunk.empty()) chunk += "\n\n";
        chunk += p;
        chunk_tokens += t;
    }
    if (!chunk.empty()) chunks.push_back(chunk);
    return chunks;
}

}  // namespace detail

inline CorpusIndex load_corpus(const std::vector<KnowledgeSource>& sources,
                               std::size_t doc_chunk_tokens = 512) {
    if (sources.empty()) throw Error("no knowledge sources");
    CorpusIndex index;
    std::set<std::string> seen_ids;
    for (const auto& src : sources) {
        if (src.category.empty()) throw Error("knowledge source with empty category: " + src.path);
        const std::string stem = std::filesystem::path(src.path).stem().string();
        std::vector<std::string> contents;
        const std::string text = read_file(src.path);
        switch (src.format) {
            case SourceFormat::Faq: {
                for (const auto& line : split_lines(text)) {
                    if (trim(line).empty()) continue;
                    nlohmann::json rec = nlohmann::json::parse(line);
                    contents.push_back("Q: " + rec.at("question").get<std::string>() + "\nA: " +
                                       rec.at("answer").get<std::string>());
                }
                break;
            }
            case SourceFormat::Table: {
                auto lines = split_lines(text);
                std::vector<std::string> header;
                for (const auto& line : lines) {
                    if (trim(line).empty()) continue;
                    auto row = detail::parse_csv_row(line);
                    if (header.empty()) {
                        header = row;
                        continue;
                    }
                    std::string serial;
                    for (std::size_t c = 0; c < row.size() && c < header.size(); ++c) {
                        if (c) serial += "; ";
                        serial += header[c] + ": " + row[c];
                    }
                    contents.push_back(serial);
                }
                break;
            }
            case SourceFormat::Doc:
                contents = detail::chunk_document(text, doc_chunk_tokens);
                break;
        }
        std::size_t n = 0;
        for (auto& content : contents) {
            KnowledgePiece piece;
            piece.id = src.category + "/" + stem + "#" + std::to_string(n++);
            piece.category = src.category;
            piece.content = std::move(content);
            if (piece.content.empty()) continue;
            if (!seen_ids.insert(piece.id).second)
                throw Error("duplicate knowledge piece id: " + piece.id);
            index.categories[src.category].push_back(std::move(piece));
        }
    }
    if (index.piece_count() == 0) throw Error("no knowledge sources");
    return index;
}

inline void embed_corpus(CorpusIndex& index, const Embedder& embedder) {
    for (auto& [_, pieces] : index.categories) {
        for (auto& piece : pieces) {
            try {
                piece.embedding = embedder.embed(piece.content);
            } catch (const std::exception& e) {
                throw Error("embedding failed for piece " + piece.id + ": " + e.what());
            }
            if (std::abs(norm2(piece.embedding) - 1.0) > 1e-9)
                throw Error("embedder returned non-unit vector for piece " + piece.id);
        }
    }
}

// k per category = min(ceil(sqrt(n)), n)
inline std::size_t default_cluster_count(std::size_t n) {
    auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    return std::min(std::max<std::size_t>(k, 1), n);
}

inline void build_clusters(CorpusIndex& index, std::uint64_t seed) {
    index.clusters.clear();
    for (const auto& [category, pieces] : index.categories) {
        index.clusters[category] =
            cluster_category(pieces, default_cluster_count(pieces.size()), seed);
    }
}

inline std::vector<AttributeSchema> default_attribute_schemas(BusinessMode mode) {
    using K = AttributeKind;
    using G = AttributeGroup;
    std::vector<AttributeSchema> out;
    auto pre = [&](std::string key, G group, std::vector<std::string> values) {
        out.push_back({std::move(key), K::Predefined, group, std::move(values), ""});
    };
    auto dyn = [&](std::string key, G group, std::string description) {
        out.push_back({std::move(key), K::Dynamic, group, {}, std::move(description)});
    };

    // Ideal-customer-profile attributes, shared fields first
    pre("customer_type", G::Icp, {"new prospect", "returning customer"});
    pre("discovery_channel", G::Icp,
        {"search engine", "third party website", "friend recommendation", "social media"});
    dyn("budget", G::Icp,
        "The budget range the individual can spend, as a currency range such as $90,000 - $130,000.");

    if (mode == BusinessMode::B2B) {
        pre("decision_making_authority", G::Icp, {"primary", "secondary"});
        pre("deal_stage", G::Icp,
            {"new leads", "demo schedule", "after demo", "decision make", "contract sent",
             "contract signed", "paid"});
        dyn("industry", G::Icp,
            "The type of business or industry the individual is associated with, such as technology, "
            "finance, healthcare, retail, or manufacturing.");
        dyn("company_name", G::Icp,
            "The name of the company or organization the individual is associated with.");
        dyn("job_information", G::Icp,
            "Detailed information about the individual's professional roles, including their official "
            "job title, primary responsibilities, and total years of relevant work experience within "
            "the industry or field. Such as marketing manager with 7 years of experience in the "
            "industry, taking care of exploration and expansion of the market.");
        dyn("company_size", G::Icp,
            "The size of the company or organization the individual is associated with, better with "
            "the number of employees.");
    } else {
        pre("decision_making_style", G::Icp, {"rational", "intuitive"});
        pre("purchasing_preference", G::Icp,
            {"discount-oriented", "value-oriented", "quality-oriented"});
        pre("spending_behavior", G::Icp,
            {"trouble spending money", "some trouble spending mony", "no trouble spending money",
             "some trouble limiting spending", "over spending"});
        pre("loyalty_level", G::Icp, {"loyal", "neutral", "disloyal"});
    }

    // Individual differences: Big Five personality plus demographics
    pre("openness", G::Individual, {"open to experience", "closed to experience"});
    pre("conscientiousness", G::Individual, {"conscientious", "careless"});
    pre("extraversion", G::Individual, {"extroverted", "introverted"});
    pre("agreeableness", G::Individual, {"agreeable", "antagonistic"});
    pre("neuroticism", G::Individual, {"neurotic", "emotionally stable"});
    dyn("age", G::Individual, "The age of the individual in years, e.g. 32.");
    pre("sex", G::Individual, {"male", "female"});
    pre("education", G::Individual,
        {"high school", "college graduate", "some postgraduate education", "postgraduate degree"});
    dyn("location", G::Individual,
        "The city and country the individual calls home, such as Karachi, Pakistan.");
    pre("marital_status", G::Individual, {"single", "married", "divorced", "widowed"});
    dyn("household", G::Individual,
        "The household composition of the individual, such as a household of more than four.");
    pre("political_affiliation", G::Individual, {"democratic", "republican", "independent"});

    std::set<std::string> keys;
    for (const auto& s : out) {
        s.check();
        if (!keys.insert(s.key).second) throw Error("duplicate attribute key: " + s.key);
    }
    return out;
}

}  // namespace sage
