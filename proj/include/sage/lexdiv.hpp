#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sage/interaction.hpp"
#include "sage/util.hpp"

namespace sage {

struct TokenStream {
    std::vector<std::string> tokens;  // lowercase, non-empty
};

// Word segmentation: runs of alphanumeric characters (any non-ASCII byte
// counts as a word character), lowercased, punctuation-only runs dropped.
// Apostrophes between word characters stay inside the token.
inline TokenStream tokenize(const std::string& text) {
    TokenStream out;
    std::string cur;
    auto is_word = [](unsigned char c) { return std::isalnum(c) || c >= 0x80; };
    for (std::size_t i = 0; i < text.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (is_word(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else if (c == '\'' && !cur.empty() && i + 1 < text.size() &&
                   is_word(static_cast<unsigned char>(text[i + 1]))) {
            cur += '\'';
        } else {
            if (!cur.empty()) out.tokens.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.tokens.push_back(cur);
    return out;
}

struct TtrFamily {
    std::optional<double> log_ttr;  // ln V / ln N, needs N >= 2
    std::optional<double> root_ttr; // V / sqrt(N)
    std::size_t vocab_size = 0;
};

inline TtrFamily ttr_family(const TokenStream& stream) {
    TtrFamily out;
    const std::size_t n = stream.tokens.size();
    std::set<std::string> types(stream.tokens.begin(), stream.tokens.end());
    out.vocab_size = types.size();
    if (n >= 1) out.root_ttr = static_cast<double>(types.size()) / std::sqrt(static_cast<double>(n));
    if (n >= 2)
        out.log_ttr = std::log(static_cast<double>(types.size())) / std::log(static_cast<double>(n));
    return out;
}

// |unique n-grams| / |total n-grams|; streams shorter than n contribute no
// n-grams and the empty corpus maps to 0.
inline double distinct_n(const std::vector<TokenStream>& streams, int n) {
    if (n < 1) throw PreconditionError("distinct_n: n must be >= 1");
    std::set<std::string> unique;
    std::size_t total = 0;
    for (const auto& stream : streams) {
        if (stream.tokens.size() < static_cast<std::size_t>(n)) continue;
        for (std::size_t i = 0; i + n <= stream.tokens.size(); ++i) {
            std::string gram;
            for (int j = 0; j < n; ++j) {
                if (j) gram += '\x1f';
                gram += stream.tokens[i + j];
            }
            unique.insert(gram);
            ++total;
        }
    }
    if (total == 0) return 0.0;
    return static_cast<double>(unique.size()) / static_cast<double>(total);
}

inline double distinct_n(const TokenStream& stream, int n) {
    return distinct_n(std::vector<TokenStream>{stream}, n);
}

namespace detail {

inline double mtld_pass(const std::vector<std::string>& tokens, double threshold) {
    const std::size_t n = tokens.size();
    double factors = 0.0;
    std::map<std::string, int> types;
    std::size_t count = 0;
    double ttr = 1.0;
    for (const auto& tok : tokens) {
        ++types[tok];
        ++count;
        ttr = static_cast<double>(types.size()) / static_cast<double>(count);
        if (ttr < threshold) {
            factors += 1.0;
            types.clear();
            count = 0;
            ttr = 1.0;
        }
    }
    if (count > 0) factors += (1.0 - ttr) / (1.0 - threshold);  // partial remainder
    if (factors == 0.0) return static_cast<double>(n) * (1.0 - threshold);
    return static_cast<double>(n) / factors;
}

}  // namespace detail

// Sequential factor count under a running type-token ratio, averaged over the
// forward and reverse passes.
inline double mtld(const TokenStream& stream, double factor_threshold = 0.72) {
    if (stream.tokens.empty()) throw PreconditionError("mtld: empty stream");
    if (factor_threshold <= 0.0 || factor_threshold >= 1.0)
        throw PreconditionError("mtld: threshold must be in (0,1)");
    double forward = detail::mtld_pass(stream.tokens, factor_threshold);
    std::vector<std::string> reversed(stream.tokens.rbegin(), stream.tokens.rend());
    double backward = detail::mtld_pass(reversed, factor_threshold);
    return 0.5 * (forward + backward);
}

// Expected per-type contribution to the TTR of a random draw of sample_size
// tokens without replacement; hypergeometric absence probabilities via
// log-factorials.
inline std::optional<double> hdd(const TokenStream& stream, int sample_size = 42) {
    if (sample_size < 1) throw PreconditionError("hdd: sample size must be >= 1");
    const std::size_t n = stream.tokens.size();
    if (n < static_cast<std::size_t>(sample_size)) return std::nullopt;
    std::map<std::string, long> freq;
    for (const auto& t : stream.tokens) ++freq[t];
    auto log_choose = [](double a, double b) {
        return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
    };
    const double nn = static_cast<double>(n);
    const double d = static_cast<double>(sample_size);
    double sum = 0.0;
    for (const auto& [_, f] : freq) {
        double absent = 0.0;
        if (nn - f >= d) absent = std::exp(log_choose(nn - f, d) - log_choose(nn, d));
        sum += (1.0 - absent) / d;
    }
    return sum;
}

struct DiversityParams {
    double mtld_threshold = 0.72;
    int hdd_sample_size = 42;
};

struct DiversityReport {
    std::optional<double> mtld;
    std::optional<double> hdd;
    std::optional<double> log_ttr;
    std::optional<double> root_ttr;
    std::size_t vocab_size = 0;
    std::size_t token_count = 0;
    std::map<int, double> distinct;  // n in {1,2,3}
};

inline DiversityReport diversity_from_streams(const std::vector<TokenStream>& streams,
                                              const DiversityParams& params = {}) {
    TokenStream corpus;
    for (const auto& s : streams)
        corpus.tokens.insert(corpus.tokens.end(), s.tokens.begin(), s.tokens.end());
    if (corpus.tokens.empty()) throw PreconditionError("diversity: empty corpus");
    DiversityReport report;
    report.token_count = corpus.tokens.size();
    auto ttr = ttr_family(corpus);
    report.log_ttr = ttr.log_ttr;
    report.root_ttr = ttr.root_ttr;
    report.vocab_size = ttr.vocab_size;
    report.mtld = mtld(corpus, params.mtld_threshold);
    report.hdd = hdd(corpus, params.hdd_sample_size);
    for (int n = 1; n <= 3; ++n) report.distinct[n] = distinct_n(streams, n);
    return report;
}

// Corpus = user-speaker turns only, across all transcripts, in order.
inline DiversityReport diversity_report(const std::vector<Transcript>& transcripts,
                                        const DiversityParams& params = {}) {
    if (transcripts.empty()) throw PreconditionError("diversity: no transcripts");
    std::vector<TokenStream> streams;
    for (const auto& t : transcripts)
        for (const auto& turn : t.turns)
            if (turn.speaker == Speaker::User) streams.push_back(tokenize(turn.content));
    return diversity_from_streams(streams, params);
}

}  // namespace sage
