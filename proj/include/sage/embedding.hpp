#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sage/util.hpp"

namespace sage {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

inline void normalize(Vec& v) {
    double n = norm2(v);
    if (n == 0.0) {
        v[0] = 1.0;  // degenerate input maps to a fixed unit vector
        return;
    }
    for (auto& x : v) x /= n;
}

inline double cosine(const Vec& a, const Vec& b) { return dot(a, b); }  // unit vectors

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual Vec embed(const std::string& text) const = 0;
    virtual std::size_t dimension() const = 0;
};

// Seeded signed feature hashing over character 3-grams, unit-normalized.
// Deterministic and offline; the default embedder for tests and mock runs.
class HashingEmbedder : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dim = 256, std::uint64_t seed = 0x5eed)
        : dim_(dim), seed_(seed) {
        if (dim_ == 0) throw PreconditionError("embedder dimension must be positive");
    }

    std::size_t dimension() const override { return dim_; }

    Vec embed(const std::string& text) const override {
        Vec v(dim_, 0.0);
        const std::string s = to_lower(text);
        if (s.size() < 3) {
            std::uint64_t h = fnv1a64(s, seed_);
            v[h % dim_] += (h >> 32 & 1) ? 1.0 : -1.0;
        }
        for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
            std::uint64_t h = fnv1a64(std::string_view(s).substr(i, 3), seed_);
            v[h % dim_] += (h >> 32 & 1) ? 1.0 : -1.0;
        }
        normalize(v);
        return v;
    }

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

}  // namespace sage
