#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace catkit {

/// Thrown on contract violations (malformed data, precondition failures).
/// Negative check results are ordinary return values, never exceptions.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}

namespace detail {

// Unambiguous encoding of identifier sequences. Identifiers are opaque
// strings, so separators occurring inside them must be escaped.
inline std::string escape_id(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '\\' || c == ',' || c == '(' || c == ')' || c == ':' || c == '[' || c == ']')
            out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

} // namespace detail

/// "(a,b,c)" with escaping; lexicographic order of keys is deterministic.
inline std::string key(const std::vector<std::string>& parts) {
    std::string out = "(";
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out.push_back(',');
        out += detail::escape_id(parts[i]);
    }
    out.push_back(')');
    return out;
}

inline std::string key(const std::string& a, const std::string& b) {
    return key(std::vector<std::string>{a, b});
}

inline std::string key(const std::string& a, const std::string& b, const std::string& c) {
    return key(std::vector<std::string>{a, b, c});
}

/// Deterministic seeded RNG used by every randomized harness.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    /// Uniform integer in [0, n).
    size_t below(size_t n) {
        require(n > 0, "Rng::below: empty range");
        return std::uniform_int_distribution<size_t>(0, n - 1)(gen_);
    }

    bool coin() { return below(2) == 1; }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        require(!v.empty(), "Rng::pick: empty vector");
        return v[below(v.size())];
    }

    uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

/// Union-find over strings; representative = least member in byte order.
class UnionFind {
  public:
    void add(const std::string& x) { parent_.emplace(x, x); }

    const std::string& find(const std::string& x) {
        auto it = parent_.find(x);
        require(it != parent_.end(), "UnionFind: unknown element " + x);
        if (it->second == x) return it->first;
        const std::string r = find(it->second);
        it->second = r;
        return parent_.find(r)->first;
    }

    void unite(const std::string& a, const std::string& b) {
        std::string ra = find(a), rb = find(b);
        if (ra == rb) return;
        if (rb < ra) std::swap(ra, rb);
        parent_[rb] = ra; // keep the lexicographically least representative
    }

    std::map<std::string, std::vector<std::string>> classes() {
        std::map<std::string, std::vector<std::string>> out;
        for (auto& [x, _] : parent_) out[find(x)].push_back(x);
        return out;
    }

  private:
    std::map<std::string, std::string> parent_;
};

} // namespace catkit
