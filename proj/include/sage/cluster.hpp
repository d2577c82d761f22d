#pragma once

#include <string>
#include <vector>

#include "sage/embedding.hpp"
#include "sage/util.hpp"

namespace sage {

struct Cluster {
    Vec centroid;
    std::vector<std::string> member_ids;
    std::vector<std::size_t> member_indices;
};

// Seeded Lloyd iteration on cosine distance over unit vectors. Assignment by
// max dot product with ties broken toward the lowest cluster index; centroids
// renormalized each round; iteration cap 100.
template <typename Piece>
std::vector<Cluster> cluster_category(const std::vector<Piece>& pieces, std::size_t k,
                                      std::uint64_t seed) {
    const std::size_t n = pieces.size();
    if (k < 1 || k > n) throw PreconditionError("cluster count k out of range [1, n]");
    for (const auto& p : pieces)
        if (p.embedding.empty()) throw PreconditionError("piece without embedding: " + p.id);

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> init;
    while (init.size() < k) {
        std::size_t idx = pick_index(rng, n);
        if (std::find(init.begin(), init.end(), idx) == init.end()) init.push_back(idx);
    }

    std::vector<Vec> centroids;
    centroids.reserve(k);
    for (auto idx : init) centroids.push_back(pieces[idx].embedding);

    std::vector<std::size_t> assign(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_sim = cosine(pieces[i].embedding, centroids[0]);
            for (std::size_t c = 1; c < k; ++c) {
                double sim = cosine(pieces[i].embedding, centroids[c]);
                if (sim > best_sim) {
                    best_sim = sim;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        for (std::size_t c = 0; c < k; ++c) {
            Vec sum(pieces[0].embedding.size(), 0.0);
            std::size_t count = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (assign[i] != c) continue;
                for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += pieces[i].embedding[d];
                ++count;
            }
            if (count == 0) continue;  // empty cluster keeps its previous centroid
            normalize(sum);
            centroids[c] = std::move(sum);
        }
    }

    std::vector<Cluster> out(k);
    for (std::size_t c = 0; c < k; ++c) out[c].centroid = centroids[c];
    for (std::size_t i = 0; i < n; ++i) {
        out[assign[i]].member_ids.push_back(pieces[i].id);
        out[assign[i]].member_indices.push_back(i);
    }
    return out;
}

}  // namespace sage
