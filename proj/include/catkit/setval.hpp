#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "catkit/core.hpp"
#include "catkit/fincat.hpp"

namespace catkit::setval {

struct FinSet {
    std::vector<std::string> elements;

    FinSet() = default;
    explicit FinSet(std::vector<std::string> elts) : elements(std::move(elts)) {
        std::set<std::string> seen;
        for (auto& e : elements)
            require(seen.insert(e).second, "FinSet: duplicate element " + e);
    }

    size_t size() const { return elements.size(); }
    bool contains(const std::string& e) const {
        for (auto& x : elements)
            if (x == e) return true;
        return false;
    }
    friend bool operator==(const FinSet&, const FinSet&) = default;

    /// Canonical set {p0, ..., p(n-1)} with a printable prefix.
    static FinSet canonical(size_t n, const std::string& prefix = "e") {
        std::vector<std::string> v;
        v.reserve(n);
        for (size_t i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i));
        return FinSet(std::move(v));
    }
};

struct FinMap {
    FinSet dom, cod;
    std::map<std::string, std::string> table;

    FinMap() = default;
    FinMap(FinSet d, FinSet c, std::map<std::string, std::string> t)
        : dom(std::move(d)), cod(std::move(c)), table(std::move(t)) {
        for (auto& e : dom.elements) {
            auto it = table.find(e);
            require(it != table.end(), "FinMap: not total at " + e);
            require(cod.contains(it->second), "FinMap: image outside codomain at " + e);
        }
        require(table.size() == dom.elements.size(), "FinMap: spurious entries");
    }

    const std::string& at(const std::string& e) const {
        auto it = table.find(e);
        require(it != table.end(), "FinMap: element not in domain: " + e);
        return it->second;
    }

    static FinMap identity(const FinSet& s) {
        std::map<std::string, std::string> t;
        for (auto& e : s.elements) t[e] = e;
        return FinMap(s, s, std::move(t));
    }

    /// this ∘ g.
    FinMap after(const FinMap& g) const {
        require(g.cod == dom, "FinMap::after: not composable");
        std::map<std::string, std::string> t;
        for (auto& e : g.dom.elements) t[e] = at(g.at(e));
        return FinMap(g.dom, cod, std::move(t));
    }

    bool surjective() const {
        std::set<std::string> img;
        for (auto& [_, v] : table) img.insert(v);
        return img.size() == cod.elements.size();
    }
    bool injective() const {
        std::set<std::string> img;
        for (auto& [_, v] : table) img.insert(v);
        return img.size() == dom.elements.size();
    }
    bool bijective() const { return surjective() && injective(); }

    friend bool operator==(const FinMap&, const FinMap&) = default;
};

/// A finite-set-valued diagram: functor shape -> FinSet.
struct SetFunctor {
    fincat::FinCat shape;
    std::map<std::string, FinSet> values;  ///< per object
    std::map<std::string, FinMap> arrows;  ///< per morphism

    SetFunctor() = default;
    SetFunctor(fincat::FinCat sh, std::map<std::string, FinSet> vals,
               std::map<std::string, FinMap> arrs)
        : shape(std::move(sh)), values(std::move(vals)), arrows(std::move(arrs)) {
        validate();
    }

    const FinSet& at(const std::string& ob) const {
        auto it = values.find(ob);
        require(it != values.end(), "SetFunctor: no value at " + ob);
        return it->second;
    }
    const FinMap& arrow(const std::string& m) const {
        auto it = arrows.find(m);
        require(it != arrows.end(), "SetFunctor: no arrow at " + m);
        return it->second;
    }

    static SetFunctor constant(const fincat::FinCat& shape, const FinSet& s) {
        std::map<std::string, FinSet> vals;
        std::map<std::string, FinMap> arrs;
        for (auto& o : shape.objects()) vals[o] = s;
        for (auto& m : shape.morphisms()) arrs[m.id] = FinMap::identity(s);
        return SetFunctor(shape, vals, arrs);
    }

    /// Restriction along a functor into this diagram's shape.
    SetFunctor restrict_along(const fincat::Functor& f) const {
        require(f.cod() == shape, "restrict_along: functor must land in the shape");
        std::map<std::string, FinSet> vals;
        std::map<std::string, FinMap> arrs;
        for (auto& o : f.dom().objects()) vals[o] = at(f.ob(o));
        for (auto& m : f.dom().morphisms()) arrs[m.id] = arrow(f.mor(m.id));
        return SetFunctor(f.dom(), vals, arrs);
    }

    friend bool operator==(const SetFunctor&, const SetFunctor&) = default;

  private:
    void validate() const {
        for (auto& o : shape.objects()) require(values.count(o), "SetFunctor: missing value " + o);
        for (auto& m : shape.morphisms()) {
            auto it = arrows.find(m.id);
            require(it != arrows.end(), "SetFunctor: missing arrow " + m.id);
            require(it->second.dom == at(m.src) && it->second.cod == at(m.dst),
                    "SetFunctor: arrow endpoints wrong at " + m.id);
        }
        for (auto& o : shape.objects())
            require(arrow(shape.identity_of(o)) == FinMap::identity(at(o)),
                    "SetFunctor: identity not preserved at " + o);
        for (auto& f : shape.morphisms())
            for (auto& g : shape.morphisms())
                if (f.dst == g.src)
                    require(arrow(shape.compose(g.id, f.id)) ==
                                arrow(g.id).after(arrow(f.id)),
                            "SetFunctor: functoriality fails on (" + g.id + "," + f.id + ")");
    }
};

// ---------------------------------------------------------------------------
// Limits and colimits

struct LimitResult {
    FinSet apex; ///< elements are tuples "(o1:e1,...)" over objects in listed order
    std::map<std::string, FinMap> projections;
};

inline LimitResult limit(const SetFunctor& d) {
    const auto& obs = d.shape.objects();
    // compatible families inside the product
    std::vector<std::map<std::string, std::string>> families;
    std::map<std::string, std::string> cur;
    std::function<void(size_t)> rec = [&](size_t k) {
        if (k == obs.size()) {
            for (auto& m : d.shape.morphisms())
                if (d.arrow(m.id).at(cur[m.src]) != cur[m.dst]) return;
            families.push_back(cur);
            return;
        }
        for (auto& e : d.at(obs[k]).elements) {
            cur[obs[k]] = e;
            rec(k + 1);
        }
        cur.erase(obs[k]);
    };
    rec(0);

    std::vector<std::string> elts;
    for (auto& fam : families) {
        std::vector<std::string> parts;
        for (auto& o : obs) parts.push_back(o + ":" + fam.at(o));
        elts.push_back(key(parts));
    }
    LimitResult res;
    res.apex = FinSet(elts);
    for (auto& o : obs) {
        std::map<std::string, std::string> t;
        for (size_t i = 0; i < families.size(); ++i) t[elts[i]] = families[i].at(o);
        res.projections.emplace(o, FinMap(res.apex, d.at(o), std::move(t)));
    }
    return res;
}

struct ColimitResult {
    FinSet apex; ///< classes "[obj:elt]" named by their least member
    std::map<std::string, FinMap> injections;
};

inline ColimitResult colimit(const SetFunctor& d) {
    UnionFind uf;
    auto tag = [](const std::string& o, const std::string& e) {
        return key(std::vector<std::string>{o + ":" + e});
    };
    for (auto& o : d.shape.objects())
        for (auto& e : d.at(o).elements) uf.add(tag(o, e));
    for (auto& m : d.shape.morphisms())
        for (auto& e : d.at(m.src).elements)
            uf.unite(tag(m.src, e), tag(m.dst, d.arrow(m.id).at(e)));

    std::set<std::string> reps;
    for (auto& o : d.shape.objects())
        for (auto& e : d.at(o).elements) reps.insert(uf.find(tag(o, e)));
    std::vector<std::string> elts;
    for (auto& r : reps) elts.push_back("[" + r + "]");
    ColimitResult res;
    res.apex = FinSet(elts);
    for (auto& o : d.shape.objects()) {
        std::map<std::string, std::string> t;
        for (auto& e : d.at(o).elements) t[e] = "[" + uf.find(tag(o, e)) + "]";
        res.injections.emplace(o, FinMap(d.at(o), res.apex, std::move(t)));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Grothendieck construction

struct GrothendieckResult {
    fincat::FinCat total;
    fincat::Functor projection; ///< opfibration with discrete fibers
};

inline GrothendieckResult grothendieck(const SetFunctor& d) {
    using fincat::Mor;
    std::vector<std::string> obs;
    std::map<std::string, std::pair<std::string, std::string>> ob_data;
    for (auto& i : d.shape.objects())
        for (auto& x : d.at(i).elements) {
            std::string id = key(i, x);
            obs.push_back(id);
            ob_data[id] = {i, x};
        }
    std::vector<Mor> ms;
    std::map<std::string, std::pair<std::string, std::string>> mor_data; // (mu, x)
    std::map<std::string, std::string> ids;
    for (auto& mu : d.shape.morphisms())
        for (auto& x : d.at(mu.src).elements) {
            std::string id = key(mu.id, x);
            std::string src = key(mu.src, x);
            std::string dst = key(mu.dst, d.arrow(mu.id).at(x));
            ms.push_back({id, src, dst});
            mor_data[id] = {mu.id, x};
            if (d.shape.is_identity(mu.id)) ids[src] = id;
        }
    std::vector<std::array<std::string, 3>> comp;
    for (auto& f : ms)
        for (auto& g : ms) {
            if (f.dst != g.src) continue;
            auto& [mf, xf] = mor_data[f.id];
            auto& [mg, xg] = mor_data[g.id];
            comp.push_back({g.id, f.id, key(d.shape.compose(mg, mf), xf)});
        }
    fincat::FinCat total = fincat::FinCat::make(obs, ms, ids, comp);
    std::map<std::string, std::string> po, pm;
    for (auto& o : obs) po[o] = ob_data[o].first;
    for (auto& m : ms) pm[m.id] = mor_data[m.id].first;
    fincat::Functor pi = fincat::Functor::make(total, d.shape, po, pm);
    return {total, pi};
}

// ---------------------------------------------------------------------------
// Enumeration and random generation of set-valued diagrams (test harness)

namespace detail {

/// DFS over arrow assignments with incremental functoriality checks.
/// visit() returning true stops the enumeration.
inline bool enumerate_arrows(const fincat::FinCat& shape,
                             const std::map<std::string, FinSet>& vals,
                             const std::function<bool(const SetFunctor&)>& visit) {
    std::vector<std::string> nonid;
    for (auto& m : shape.morphisms())
        if (!shape.is_identity(m.id)) nonid.push_back(m.id);
    std::map<std::string, FinMap> arrs;
    for (auto& o : shape.objects())
        arrs[shape.identity_of(o)] = FinMap::identity(vals.at(o));
    bool stop = false;

    std::function<bool()> consistent = [&]() {
        for (auto& f : shape.morphisms()) {
            if (!arrs.count(f.id)) continue;
            for (auto& g : shape.morphisms()) {
                if (!arrs.count(g.id) || f.dst != g.src) continue;
                const std::string& c = shape.compose(g.id, f.id);
                if (!arrs.count(c)) continue;
                if (!(arrs.at(c) == arrs.at(g.id).after(arrs.at(f.id)))) return false;
            }
        }
        return true;
    };

    std::function<void(size_t)> rec = [&](size_t k) {
        if (stop) return;
        if (k == nonid.size()) {
            if (visit(SetFunctor(shape, vals, arrs))) stop = true;
            return;
        }
        const auto& m = shape.mor(nonid[k]);
        const FinSet& D = vals.at(m.src);
        const FinSet& C = vals.at(m.dst);
        // enumerate all maps D -> C
        std::vector<size_t> idx(D.size(), 0);
        if (D.size() == 0) {
            arrs[m.id] = FinMap(D, C, {});
            if (consistent()) rec(k + 1);
            arrs.erase(m.id);
            return;
        }
        if (C.size() == 0) return; // no maps from a nonempty set to the empty set
        while (true) {
            std::map<std::string, std::string> t;
            for (size_t i = 0; i < D.size(); ++i) t[D.elements[i]] = C.elements[idx[i]];
            arrs[m.id] = FinMap(D, C, std::move(t));
            if (consistent()) rec(k + 1);
            arrs.erase(m.id);
            if (stop) return;
            size_t j = 0;
            while (j < idx.size() && ++idx[j] == C.size()) idx[j++] = 0;
            if (j == idx.size()) break;
        }
    };
    rec(0);
    return stop;
}

} // namespace detail

/// Enumerate every SetFunctor on `shape` whose values have size <= max_size
/// (canonical element names). visit() returning true stops early.
inline void enumerate_set_functors(const fincat::FinCat& shape, size_t max_size,
                                   const std::function<bool(const SetFunctor&)>& visit,
                                   size_t min_size = 0) {
    const auto& obs = shape.objects();
    std::vector<size_t> sizes(obs.size(), min_size);
    if (obs.empty()) {
        visit(SetFunctor(shape, {}, {}));
        return;
    }
    bool stop = false;
    while (!stop) {
        std::map<std::string, FinSet> vals;
        for (size_t i = 0; i < obs.size(); ++i)
            vals[obs[i]] = FinSet::canonical(sizes[i], obs[i] + "_");
        if (detail::enumerate_arrows(shape, vals, visit)) stop = true;
        size_t j = 0;
        while (j < sizes.size() && ++sizes[j] > max_size) sizes[j++] = min_size;
        if (j == sizes.size()) break;
    }
}

/// Seeded random SetFunctor with values of size in [min_size, max_size];
/// arrow tables drawn uniformly then repaired by retry on functoriality
/// violations.
inline SetFunctor random_set_functor(const fincat::FinCat& shape, Rng& rng, size_t max_size,
                                     size_t min_size = 0, size_t tries = 2000) {
    for (size_t attempt = 0; attempt < tries; ++attempt) {
        std::map<std::string, FinSet> vals;
        bool empty_issue = false;
        for (auto& o : shape.objects())
            vals[o] = FinSet::canonical(min_size + rng.below(max_size - min_size + 1), o + "_");
        // assign arrows one by one with local consistency retries
        std::map<std::string, FinMap> arrs;
        for (auto& o : shape.objects()) arrs[shape.identity_of(o)] = FinMap::identity(vals[o]);
        bool fail = false;
        for (auto& m : shape.morphisms()) {
            if (shape.is_identity(m.id)) continue;
            const FinSet& D = vals[m.src];
            const FinSet& C = vals[m.dst];
            if (D.size() > 0 && C.size() == 0) { fail = true; break; }
            std::map<std::string, std::string> t;
            for (auto& e : D.elements) t[e] = C.elements[rng.below(C.size())];
            arrs[m.id] = FinMap(D, C, std::move(t));
        }
        if (fail || empty_issue) continue;
        // functoriality repair: force composites where possible, else retry
        bool consistent = true;
        for (auto& f : shape.morphisms()) {
            for (auto& g : shape.morphisms()) {
                if (f.dst != g.src) continue;
                const std::string& c = shape.compose(g.id, f.id);
                FinMap want = arrs.at(g.id).after(arrs.at(f.id));
                if (shape.is_identity(c)) {
                    if (!(want == arrs.at(c))) { consistent = false; break; }
                } else {
                    arrs[c] = want; // overwrite; later pairs may still disagree
                }
            }
            if (!consistent) break;
        }
        if (!consistent) continue;
        try {
            return SetFunctor(shape, vals, arrs);
        } catch (const Error&) {
            continue;
        }
    }
    throw Error("random_set_functor: could not generate a functorial instance");
}

} // namespace catkit::setval
