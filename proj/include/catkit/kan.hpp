#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "catkit/core.hpp"
#include "catkit/fincat.hpp"
#include "catkit/setval.hpp"

namespace catkit::kan {

using fincat::FinCat;
using fincat::Functor;
using fincat::NatTrans;
using setval::ColimitResult;
using setval::FinMap;
using setval::FinSet;
using setval::LimitResult;
using setval::SetFunctor;

// ---------------------------------------------------------------------------
// Pointwise Kan extensions for finite-set-valued diagrams

struct KanExtension {
    SetFunctor result; ///< over the codomain shape
    /// Per object j of the codomain, the slice computation that produced the
    /// value (kept for building canonical maps out of / into the extension).
    std::map<std::string, fincat::SliceResult> slices;
    std::map<std::string, ColimitResult> colimits; ///< left Kan only
    std::map<std::string, LimitResult> limits;     ///< right Kan only
};

/// Left Kan extension: value at j is the colimit of X over I ×_{/J} j.
inline KanExtension kan_left(const Functor& alpha, const SetFunctor& X) {
    require(X.shape == alpha.dom(), "kan_left: diagram must live over dom(alpha)");
    const FinCat& J = alpha.cod();
    KanExtension ext;
    std::map<std::string, FinSet> vals;
    for (auto& j : J.objects()) {
        fincat::SliceResult s = fincat::slice_over(alpha, j);
        SetFunctor over_slice = X.restrict_along(s.proj_second);
        ColimitResult c = setval::colimit(over_slice);
        vals[j] = c.apex;
        ext.slices.emplace(j, std::move(s));
        ext.colimits.emplace(j, std::move(c));
    }
    std::map<std::string, FinMap> arrs;
    for (auto& rho : J.morphisms()) {
        const auto& src_slice = ext.slices.at(rho.src);
        const auto& src_col = ext.colimits.at(rho.src);
        const auto& dst_col = ext.colimits.at(rho.dst);
        std::map<std::string, std::string> t;
        for (auto& o : src_slice.cat.objects()) {
            const std::string i = src_slice.proj_second.ob(o);
            const std::string m = src_slice.mu.at(o); // alpha(i) -> rho.src
            const std::string m2 = J.compose(rho.id, m);
            const std::string target_ob = key("0", i, m2);
            for (auto& x : X.at(i).elements) {
                const std::string from = src_col.injections.at(o).at(x);
                const std::string to = dst_col.injections.at(target_ob).at(x);
                auto it = t.find(from);
                require(it == t.end() || it->second == to,
                        "kan_left: transition map not well-defined");
                t[from] = to;
            }
        }
        arrs[rho.id] = FinMap(vals.at(rho.src), vals.at(rho.dst), std::move(t));
    }
    ext.result = SetFunctor(J, std::move(vals), std::move(arrs));
    return ext;
}

/// Right Kan extension: value at j is the limit of X over j ×_{/J} I.
inline KanExtension kan_right(const Functor& alpha, const SetFunctor& X) {
    require(X.shape == alpha.dom(), "kan_right: diagram must live over dom(alpha)");
    const FinCat& J = alpha.cod();
    KanExtension ext;
    std::map<std::string, FinSet> vals;
    for (auto& j : J.objects()) {
        fincat::SliceResult s = fincat::slice_under(alpha, j); // objects (i, 0, m: j->alpha(i))
        SetFunctor over_slice = X.restrict_along(s.proj_first);
        LimitResult l = setval::limit(over_slice);
        vals[j] = l.apex;
        ext.slices.emplace(j, std::move(s));
        ext.limits.emplace(j, std::move(l));
    }
    std::map<std::string, FinMap> arrs;
    for (auto& rho : J.morphisms()) {
        const auto& dst_slice = ext.slices.at(rho.dst);
        const auto& src_lim = ext.limits.at(rho.src);
        const auto& dst_lim = ext.limits.at(rho.dst);
        std::map<std::string, std::string> t;
        for (auto& s_elt : src_lim.apex.elements) {
            // target family: component at (i, m': rho.dst -> alpha(i)) is the
            // source component at (i, m' ∘ rho)
            std::optional<std::string> found;
            for (auto& t_elt : dst_lim.apex.elements) {
                bool ok = true;
                for (auto& o : dst_slice.cat.objects()) {
                    const std::string i = dst_slice.proj_first.ob(o);
                    const std::string m2 = dst_slice.mu.at(o); // rho.dst -> alpha(i)
                    const std::string m = J.compose(m2, rho.id);
                    const std::string src_ob = key(i, "0", m);
                    if (dst_lim.projections.at(o).at(t_elt) !=
                        src_lim.projections.at(src_ob).at(s_elt)) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    require(!found, "kan_right: transition not unique");
                    found = t_elt;
                }
            }
            require(found.has_value(), "kan_right: transition not found");
            t[s_elt] = *found;
        }
        arrs[rho.id] = FinMap(vals.at(rho.src), vals.at(rho.dst), std::move(t));
    }
    ext.result = SetFunctor(J, std::move(vals), std::move(arrs));
    return ext;
}

/// Unit X -> alpha^* (alpha_! X) of the left Kan adjunction, per object of I.
inline std::map<std::string, FinMap> kan_left_unit(const Functor& alpha, const SetFunctor& X,
                                                   const KanExtension& ext) {
    std::map<std::string, FinMap> unit;
    for (auto& i : alpha.dom().objects()) {
        const std::string j = alpha.ob(i);
        const std::string ob = key("0", i, alpha.cod().identity_of(j));
        std::map<std::string, std::string> t;
        for (auto& x : X.at(i).elements) t[x] = ext.colimits.at(j).injections.at(ob).at(x);
        unit[i] = FinMap(X.at(i), ext.result.at(j), std::move(t));
    }
    return unit;
}

// ---------------------------------------------------------------------------
// Natural transformation enumeration (oracle helper)

/// All natural transformations X => Y between set-valued diagrams.
inline std::vector<std::map<std::string, FinMap>> all_nat_trans(const SetFunctor& X,
                                                                const SetFunctor& Y) {
    require(X.shape == Y.shape, "all_nat_trans: shapes differ");
    const auto& obs = X.shape.objects();
    std::vector<std::map<std::string, FinMap>> out;
    std::map<std::string, FinMap> cur;
    std::function<void(size_t)> rec = [&](size_t k) {
        if (k == obs.size()) {
            for (auto& m : X.shape.morphisms())
                if (!(cur.at(m.dst).after(X.arrow(m.id)) ==
                      Y.arrow(m.id).after(cur.at(m.src))))
                    return;
            out.push_back(cur);
            return;
        }
        const FinSet& D = X.at(obs[k]);
        const FinSet& C = Y.at(obs[k]);
        if (D.size() == 0) {
            cur[obs[k]] = FinMap(D, C, {});
            rec(k + 1);
            cur.erase(obs[k]);
            return;
        }
        if (C.size() == 0) return;
        std::vector<size_t> idx(D.size(), 0);
        while (true) {
            std::map<std::string, std::string> t;
            for (size_t i = 0; i < D.size(); ++i) t[D.elements[i]] = C.elements[idx[i]];
            cur[obs[k]] = FinMap(D, C, std::move(t));
            rec(k + 1);
            cur.erase(obs[k]);
            size_t j = 0;
            while (j < idx.size() && ++idx[j] == C.size()) idx[j++] = 0;
            if (j == idx.size()) break;
        }
    };
    rec(0);
    return out;
}

/// Adjunction bijection check: Hom(alpha_! X, Y) vs Hom(X, alpha^* Y), via the
/// unit. Returns false if the canonical map fails to be a bijection.
inline bool kan_left_adjunction_holds(const Functor& alpha, const SetFunctor& X,
                                      const SetFunctor& Y) {
    KanExtension ext = kan_left(alpha, X);
    auto unit = kan_left_unit(alpha, X, ext);
    SetFunctor restricted = Y.restrict_along(alpha);
    auto lhs = all_nat_trans(ext.result, Y);
    auto rhs = all_nat_trans(X, restricted);
    if (lhs.size() != rhs.size()) return false;
    std::set<std::string> images;
    auto encode = [](const std::map<std::string, FinMap>& nt) {
        std::string s;
        for (auto& [o, m] : nt) {
            s += o + "{";
            for (auto& [k, v] : m.table) s += k + ">" + v + ";";
            s += "}";
        }
        return s;
    };
    for (auto& phi : lhs) {
        // transpose: X -> alpha^* alpha_! X -> alpha^* Y
        std::map<std::string, FinMap> tr;
        for (auto& i : alpha.dom().objects())
            tr[i] = phi.at(alpha.ob(i)).after(unit.at(i));
        images.insert(encode(tr));
    }
    std::set<std::string> all;
    for (auto& nt : rhs) all.insert(encode(nt));
    return images == all;
}

inline bool kan_right_adjunction_holds(const Functor& alpha, const SetFunctor& X,
                                       const SetFunctor& Y) {
    // Hom(alpha^* X, Y) vs Hom(X, alpha_* Y) -- checked by cardinality plus
    // injectivity of the canonical transpose through the counit.
    KanExtension ext = kan_right(alpha, Y);
    SetFunctor restricted = X.restrict_along(alpha);
    auto lhs = all_nat_trans(restricted, Y);
    auto rhs = all_nat_trans(X, ext.result);
    if (lhs.size() != rhs.size()) return false;
    // counit alpha^* alpha_* Y -> Y at i: project the limit family at
    // (i, id_{alpha(i)})
    std::map<std::string, FinMap> counit;
    for (auto& i : alpha.dom().objects()) {
        const std::string j = alpha.ob(i);
        const std::string ob = key(i, "0", alpha.cod().identity_of(j));
        counit[i] = ext.limits.at(j).projections.at(ob);
    }
    std::set<std::string> images;
    auto encode = [](const std::map<std::string, FinMap>& nt) {
        std::string s;
        for (auto& [o, m] : nt) {
            s += o + "{";
            for (auto& [k, v] : m.table) s += k + ">" + v + ";";
            s += "}";
        }
        return s;
    };
    for (auto& phi : rhs) {
        std::map<std::string, FinMap> tr;
        for (auto& i : alpha.dom().objects())
            tr[i] = counit.at(i).after(phi.at(alpha.ob(i)));
        images.insert(encode(tr));
    }
    std::set<std::string> all;
    for (auto& nt : lhs) all.insert(encode(nt));
    return images == all;
}

// ---------------------------------------------------------------------------
// Two-squares and base change

/// 2-commutative square with mu : alpha ∘ B => beta ∘ A.
struct TwoSquare {
    Functor A;     ///< L -> K
    Functor B;     ///< L -> I
    Functor alpha; ///< I -> J
    Functor beta;  ///< K -> J
    NatTrans mu;   ///< alpha∘B => beta∘A

    static TwoSquare make(Functor A, Functor B, Functor alpha, Functor beta, NatTrans mu) {
        TwoSquare s{std::move(A), std::move(B), std::move(alpha), std::move(beta), std::move(mu)};
        require(s.A.dom() == s.B.dom(), "TwoSquare: A and B must share their domain");
        require(s.alpha.dom() == s.B.cod(), "TwoSquare: alpha must start at cod(B)");
        require(s.beta.dom() == s.A.cod(), "TwoSquare: beta must start at cod(A)");
        require(s.alpha.cod() == s.beta.cod(), "TwoSquare: alpha and beta must share codomain");
        require(s.mu.src() == s.alpha.after(s.B) && s.mu.tgt() == s.beta.after(s.A),
                "TwoSquare: mu must be alpha∘B => beta∘A");
        return s;
    }

    /// The comma square over alpha, beta with its canonical 2-cell.
    static TwoSquare comma(const Functor& alpha, const Functor& beta) {
        fincat::SliceResult s = fincat::slice(alpha, beta);
        return make(s.proj_first, s.proj_second, alpha, beta, s.mu);
    }

    /// Strictly commutative square (mu consists of identities).
    static TwoSquare strict(Functor A, Functor B, Functor alpha, Functor beta) {
        Functor top = alpha.after(B);
        Functor bot = beta.after(A);
        require(top == bot, "TwoSquare::strict: square does not commute");
        return make(std::move(A), std::move(B), std::move(alpha), std::move(beta),
                    NatTrans::identity(top));
    }
};

/// Left base-change morphism A_! B^* X -> beta^* alpha_! X, as one map per
/// object of K. Bijectivity of every component is homotopy exactness (left).
inline std::map<std::string, FinMap> base_change_map(const TwoSquare& sq, const SetFunctor& X) {
    require(X.shape == sq.alpha.dom(), "base_change_map: X must live over I");
    const FinCat& J = sq.alpha.cod();
    KanExtension right_side = kan_left(sq.alpha, X); // alpha_! X over J
    SetFunctor pulled = X.restrict_along(sq.B);      // B^* X over L
    KanExtension left_side = kan_left(sq.A, pulled); // A_! B^* X over K

    std::map<std::string, FinMap> out;
    for (auto& k : sq.A.cod().objects()) {
        const auto& slice_k = left_side.slices.at(k);
        const auto& col_k = left_side.colimits.at(k);
        const std::string jk = sq.beta.ob(k);
        const auto& col_target = right_side.colimits.at(jk);
        std::map<std::string, std::string> t;
        for (auto& o : slice_k.cat.objects()) {
            const std::string l = slice_k.proj_second.ob(o);
            const std::string nu = slice_k.mu.at(o); // A(l) -> k
            const std::string m = J.compose(sq.beta.mor(nu), sq.mu.at(l)); // alpha(B l) -> beta(k)
            const std::string target_ob = key("0", sq.B.ob(l), m);
            for (auto& x : X.at(sq.B.ob(l)).elements) {
                const std::string from = col_k.injections.at(o).at(x);
                const std::string to = col_target.injections.at(target_ob).at(x);
                auto it = t.find(from);
                require(it == t.end() || it->second == to,
                        "base_change_map: comparison not well-defined");
                t[from] = to;
            }
        }
        out[k] = FinMap(left_side.result.at(k), right_side.result.at(jk), std::move(t));
    }
    return out;
}

/// Right base-change alpha^* beta_* X' -> B_* A^* X' (the mate), per object of I.
inline std::map<std::string, FinMap> base_change_map_right(const TwoSquare& sq,
                                                           const SetFunctor& Xp) {
    require(Xp.shape == sq.beta.dom(), "base_change_map_right: X' must live over K");
    const FinCat& J = sq.alpha.cod();
    KanExtension lhs = kan_right(sq.beta, Xp);                 // beta_* X' over J
    SetFunctor pulled = Xp.restrict_along(sq.A);               // A^* X' over L
    KanExtension rhs = kan_right(sq.B, pulled);                // B_* A^* X' over I

    std::map<std::string, FinMap> out;
    for (auto& i : sq.alpha.dom().objects()) {
        const std::string ji = sq.alpha.ob(i);
        const auto& lim_src = lhs.limits.at(ji);
        const auto& lim_dst = rhs.limits.at(i);
        const auto& slice_dst = rhs.slices.at(i); // objects (l, 0, n: i -> B(l))
        std::map<std::string, std::string> t;
        for (auto& s_elt : lim_src.apex.elements) {
            std::optional<std::string> found;
            for (auto& t_elt : lim_dst.apex.elements) {
                bool ok = true;
                for (auto& o : slice_dst.cat.objects()) {
                    const std::string l = slice_dst.proj_first.ob(o);
                    const std::string n = slice_dst.mu.at(o); // i -> B(l)
                    // component index in beta_* X' at ji: (A(l), mu_l ∘ alpha(n))
                    const std::string m = J.compose(sq.mu.at(l), sq.alpha.mor(n));
                    const std::string src_ob = key(sq.A.ob(l), "0", m);
                    if (lim_dst.projections.at(o).at(t_elt) !=
                        lim_src.projections.at(src_ob).at(s_elt)) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    require(!found, "base_change_map_right: not unique");
                    found = t_elt;
                }
            }
            require(found.has_value(), "base_change_map_right: no image");
            t[s_elt] = *found;
        }
        out[i] = FinMap(lim_src.apex, lim_dst.apex, std::move(t));
    }
    return out;
}

struct ExactnessVerdict {
    bool exact = true;
    size_t value_bound = 0;
    size_t diagrams_checked = 0;
    /// Counterexample: the diagram X over I and the object of K at which the
    /// base-change component fails to be bijective.
    std::optional<SetFunctor> counterexample;
    std::optional<std::string> failing_object;
};

/// Homotopy exactness up to value_bound: the left base change is bijective
/// for every X over I with values of size <= value_bound (exhaustive).
inline ExactnessVerdict check_homotopy_exact(const TwoSquare& sq, size_t value_bound) {
    require(value_bound >= 2, "check_homotopy_exact: value_bound must be at least 2");
    ExactnessVerdict v;
    v.value_bound = value_bound;
    setval::enumerate_set_functors(sq.alpha.dom(), value_bound, [&](const SetFunctor& X) {
        ++v.diagrams_checked;
        auto bc = base_change_map(sq, X);
        for (auto& [k, comp] : bc) {
            if (!comp.bijective()) {
                v.exact = false;
                v.counterexample = X;
                v.failing_object = k;
                return true;
            }
        }
        return false;
    });
    return v;
}

// ---------------------------------------------------------------------------
// Families (the bifibration of finite families over set-valued diagrams)

/// An object of the fiber over F: a diagram of sets with a natural structure
/// map to F.
struct Family {
    SetFunctor base;  ///< F over the shape I
    SetFunctor total; ///< G over the same shape
    std::map<std::string, FinMap> structure; ///< per object i: G(i) -> F(i)

    Family() = default;
    Family(SetFunctor b, SetFunctor t, std::map<std::string, FinMap> s)
        : base(std::move(b)), total(std::move(t)), structure(std::move(s)) {
        require(base.shape == total.shape, "Family: shapes differ");
        for (auto& i : base.shape.objects()) {
            auto it = structure.find(i);
            require(it != structure.end(), "Family: missing structure map at " + i);
            require(it->second.dom == total.at(i) && it->second.cod == base.at(i),
                    "Family: structure endpoints wrong at " + i);
        }
        for (auto& m : base.shape.morphisms())
            require(structure.at(m.dst).after(total.arrow(m.id)) ==
                        base.arrow(m.id).after(structure.at(m.id != "" ? m.src : m.src)),
                    "Family: structure not natural at " + m.id);
    }

    friend bool operator==(const Family&, const Family&) = default;
};

/// Restriction of a family along a functor into its shape.
inline Family restrict_family(const Family& fam, const Functor& f) {
    std::map<std::string, FinMap> st;
    for (auto& o : f.dom().objects()) st[o] = fam.structure.at(f.ob(o));
    return Family(fam.base.restrict_along(f), fam.total.restrict_along(f), std::move(st));
}

/// Relative left Kan extension of families: total(j) = colim over I ×_{/J} j
/// of the pushed-forward restriction, structure induced by F(mu).
inline Family relative_kan_left(const Functor& alpha, const SetFunctor& F, const Family& G) {
    require(F.shape == alpha.cod(), "relative_kan_left: F must live over J");
    require(G.base == F.restrict_along(alpha), "relative_kan_left: family base must be alpha^* F");
    KanExtension ext = kan_left(alpha, G.total);
    const FinCat& J = alpha.cod();
    std::map<std::string, FinMap> st;
    for (auto& j : J.objects()) {
        const auto& sl = ext.slices.at(j);
        const auto& col = ext.colimits.at(j);
        std::map<std::string, std::string> t;
        for (auto& o : sl.cat.objects()) {
            const std::string i = sl.proj_second.ob(o);
            const std::string m = sl.mu.at(o); // alpha(i) -> j
            for (auto& g : G.total.at(i).elements) {
                const std::string cls = col.injections.at(o).at(g);
                const std::string val = F.arrow(m).at(G.structure.at(i).at(g));
                auto it = t.find(cls);
                require(it == t.end() || it->second == val,
                        "relative_kan_left: structure map not well-defined");
                t[cls] = val;
            }
        }
        st[j] = FinMap(ext.result.at(j), F.at(j), std::move(t));
    }
    return Family(F, ext.result, std::move(st));
}

// ---------------------------------------------------------------------------
// Latching objects

struct LatchingObject {
    FinSet total;     ///< colimit over the punctured slice
    FinMap structure; ///< total -> F(i)
    FinMap comparison; ///< canonical map total -> G(i)
};

/// Directedness witness check: degree non-decreasing, strictly increasing on
/// non-identities ("the preimage of an identity consists of identities").
inline void require_directed(const FinCat& I, const std::map<std::string, size_t>& degree) {
    for (auto& m : I.morphisms()) {
        require(degree.count(m.src) && degree.count(m.dst), "degree witness incomplete");
        require(degree.at(m.src) <= degree.at(m.dst),
                "degree witness not monotone at " + m.id);
        if (degree.at(m.src) == degree.at(m.dst))
            require(I.is_identity(m.id), "category not directed under witness: " + m.id);
    }
}

inline LatchingObject latching(const SetFunctor& F, const std::map<std::string, size_t>& degree,
                               const Family& G, const std::string& i) {
    require(F == G.base, "latching: family must live over F");
    const FinCat& I = F.shape;
    require_directed(I, degree);
    // punctured slice: objects (j, a: j -> i), a not the identity of i
    fincat::SliceResult sl = fincat::slice_over(Functor::identity(I), i);
    std::vector<std::string> keep;
    for (auto& o : sl.cat.objects())
        if (!(sl.proj_second.ob(o) == i && sl.mu.at(o) == I.identity_of(i))) keep.push_back(o);
    // build the punctured diagram of totals directly, then colimit
    std::vector<fincat::Mor> ms;
    std::map<std::string, std::string> ids;
    std::vector<std::array<std::string, 3>> comp;
    std::set<std::string> keep_set(keep.begin(), keep.end());
    for (auto& m : sl.cat.morphisms())
        if (keep_set.count(m.src) && keep_set.count(m.dst)) ms.push_back(m);
    for (auto& o : keep) ids[o] = sl.cat.identity_of(o);
    for (auto& f : ms)
        for (auto& g : ms)
            if (f.dst == g.src) comp.push_back({g.id, f.id, sl.cat.compose(g.id, f.id)});
    FinCat punctured = FinCat::make(keep, ms, ids, comp);
    std::map<std::string, FinSet> vals;
    std::map<std::string, FinMap> arrs;
    for (auto& o : keep) vals[o] = G.total.at(sl.proj_second.ob(o));
    for (auto& m : ms) arrs[m.id] = G.total.arrow(sl.proj_second.mor(m.id));
    SetFunctor diagram(punctured, vals, arrs);
    ColimitResult col = setval::colimit(diagram);

    std::map<std::string, std::string> st, cmp;
    for (auto& o : keep) {
        const std::string j = sl.proj_second.ob(o);
        const std::string a = sl.mu.at(o); // j -> i
        for (auto& g : G.total.at(j).elements) {
            const std::string cls = col.injections.at(o).at(g);
            const std::string sval = F.arrow(a).at(G.structure.at(j).at(g));
            const std::string cval = G.total.arrow(a).at(g);
            auto it = st.find(cls);
            require(it == st.end() || it->second == sval, "latching: structure ill-defined");
            auto it2 = cmp.find(cls);
            require(it2 == cmp.end() || it2->second == cval, "latching: comparison ill-defined");
            st[cls] = sval;
            cmp[cls] = cval;
        }
    }
    return LatchingObject{col.apex, FinMap(col.apex, F.at(i), std::move(st)),
                          FinMap(col.apex, G.total.at(i), std::move(cmp))};
}

// ---------------------------------------------------------------------------
// Pointwise multi-pullback via the twisted-arrow limit formula (arity 2)

/// A 2-ary multimorphism of set-valued diagrams: per object i a map
/// S1(i) × S2(i) -> T(i), natural in i. Pairs are encoded with key(s1, s2).
struct BinaryMultiMor {
    SetFunctor s1, s2, t;
    /// table.at(i).at(key(x,y)) is the value at i on the pair (x, y).
    std::map<std::string, std::map<std::string, std::string>> table;

    static BinaryMultiMor make(SetFunctor s1, SetFunctor s2, SetFunctor t,
                               std::map<std::string, std::map<std::string, std::string>> tab) {
        BinaryMultiMor f{std::move(s1), std::move(s2), std::move(t), std::move(tab)};
        const FinCat& I = f.s1.shape;
        require(f.s2.shape == I && f.t.shape == I, "BinaryMultiMor: shapes differ");
        for (auto& i : I.objects())
            for (auto& x : f.s1.at(i).elements)
                for (auto& y : f.s2.at(i).elements)
                    require(f.t.at(i).contains(f.at(i, x, y)),
                            "BinaryMultiMor: value outside target at " + i);
        for (auto& m : I.morphisms())
            for (auto& x : f.s1.at(m.src).elements)
                for (auto& y : f.s2.at(m.src).elements)
                    require(f.t.arrow(m.id).at(f.at(m.src, x, y)) ==
                                f.at(m.dst, f.s1.arrow(m.id).at(x), f.s2.arrow(m.id).at(y)),
                            "BinaryMultiMor: not natural at " + m.id);
        return f;
    }

    const std::string& at(const std::string& i, const std::string& x, const std::string& y) const {
        return table.at(i).at(key(x, y));
    }
};

namespace detail {

/// Fiber of a family over a base element.
inline std::vector<std::string> family_fiber(const Family& fam, const std::string& obj,
                                             const std::string& base_elt) {
    std::vector<std::string> out;
    for (auto& e : fam.total.at(obj).elements)
        if (fam.structure.at(obj).at(e) == base_elt) out.push_back(e);
    return out;
}

} // namespace detail

/// The slot-1 pullback of (E2; F) along f, computed pointwise as the limit
/// over the twisted-arrow-style category X_{i1}(I), together with the
/// evaluation multimorphism Xi : (result, E2) -> F over f.
struct MultipullbackResult {
    Family e1;
    /// Xi at object i maps key(x, e2) to an element of F(i).
    std::map<std::string, std::map<std::string, std::string>> xi;
};

inline MultipullbackResult pointwise_multipullback(const BinaryMultiMor& f, const Family& E2,
                                                   const Family& F) {
    require(E2.base == f.s2, "pointwise_multipullback: E2 must live over S2");
    require(F.base == f.t, "pointwise_multipullback: F must live over T");
    const FinCat& I = f.s1.shape;

    // X_{i1}(I): objects (i2, j, a1: i1->j, a2: i2->j). An element of the limit
    // assigns to each object and each s2 in the fiber of S2(i2) over
    // S2(a2)(-)-compatible data a map of fibers; we realize limit elements as
    // canonical strings of their component tables.
    struct XObj {
        std::string i2, j, a1, a2;
    };
    auto xobjects = [&](const std::string& i1) {
        std::vector<XObj> out;
        for (auto& i2 : I.objects())
            for (auto& j : I.objects())
                for (auto& a1 : I.hom(i1, j))
                    for (auto& a2 : I.hom(i2, j)) out.push_back({i2, j, a1, a2});
        return out;
    };

    // component position: per x-object, per s2 in S2(i2)-fiber... the slot-1
    // pullback at (a1, a2) over s1: for each s2 in S2(i2), a map from the
    // E2-fiber over s2 to the F-fiber over f_j(S1(a1)s1, S2(a2)s2).
    auto component_ok = [&](const std::string& i1, const std::string& s1, const XObj& xo,
                            const std::map<std::string, std::map<std::string, std::string>>& comp)
        -> bool {
        for (auto& s2 : f.s2.at(xo.i2).elements) {
            auto it = comp.find(s2);
            if (it == comp.end()) return false;
            const std::string target_base =
                f.at(xo.j, f.s1.arrow(xo.a1).at(s1), f.s2.arrow(xo.a2).at(s2));
            for (auto& e2 : detail::family_fiber(E2, xo.i2, s2)) {
                auto jt = it->second.find(e2);
                if (jt == it->second.end()) return false;
                if (F.structure.at(xo.j).at(jt->second) != target_base) return false;
            }
            if (it->second.size() != detail::family_fiber(E2, xo.i2, s2).size()) return false;
        }
        return true;
    };

    // Enumerate all limit elements at (i1, s1): assign to every x-object a
    // component table, subject to compatibility under X-morphisms.
    // X-morphisms: (rho: j->j', sigma: i2'->i2) with rho∘a1 = a1',
    // rho∘a2∘sigma = a2'. Compatibility: comp'[s2'](e') =
    // F(rho)(comp[S2(sigma)s2'](E2(sigma)e')).
    auto limit_elements = [&](const std::string& i1, const std::string& s1) {
        std::vector<XObj> xs = xobjects(i1);
        // candidate component tables per x-object
        std::vector<std::vector<std::map<std::string, std::map<std::string, std::string>>>> cands;
        for (auto& xo : xs) {
            std::vector<std::map<std::string, std::map<std::string, std::string>>> cc;
            // enumerate: per s2 a map fiber(E2,s2) -> fiber(F, target)
            std::vector<std::string> s2s = f.s2.at(xo.i2).elements;
            std::map<std::string, std::map<std::string, std::string>> cur;
            std::function<void(size_t)> rec = [&](size_t k) {
                if (k == s2s.size()) {
                    cc.push_back(cur);
                    return;
                }
                const std::string& s2 = s2s[k];
                const std::string tb =
                    f.at(xo.j, f.s1.arrow(xo.a1).at(s1), f.s2.arrow(xo.a2).at(s2));
                auto dom = detail::family_fiber(E2, xo.i2, s2);
                auto cod = detail::family_fiber(F, xo.j, tb);
                if (dom.empty()) {
                    cur[s2] = {};
                    rec(k + 1);
                    cur.erase(s2);
                    return;
                }
                if (cod.empty()) return;
                std::vector<size_t> idx(dom.size(), 0);
                while (true) {
                    std::map<std::string, std::string> t;
                    for (size_t z = 0; z < dom.size(); ++z) t[dom[z]] = cod[idx[z]];
                    cur[s2] = t;
                    rec(k + 1);
                    cur.erase(s2);
                    size_t jz = 0;
                    while (jz < idx.size() && ++idx[jz] == cod.size()) idx[jz++] = 0;
                    if (jz == idx.size()) break;
                }
            };
            rec(0);
            cands.push_back(std::move(cc));
        }
        // choose one candidate per x-object subject to all compatibilities
        std::vector<std::map<std::string, std::map<std::string, std::string>>> chosen(xs.size());
        std::vector<std::vector<std::map<std::string, std::map<std::string, std::string>>>> found;
        std::function<bool(size_t, size_t)> compatible = [&](size_t a, size_t b) {
            // check morphisms xs[a] -> xs[b]
            const XObj& A = xs[a];
            const XObj& Bo = xs[b];
            for (auto& rho : I.hom(A.j, Bo.j))
                for (auto& sigma : I.hom(Bo.i2, A.i2)) {
                    if (I.compose(rho, A.a1) != Bo.a1) continue;
                    if (I.compose(I.compose(rho, A.a2), sigma) != Bo.a2) continue;
                    for (auto& s2p : f.s2.at(Bo.i2).elements) {
                        const std::string s2 = f.s2.arrow(sigma).at(s2p);
                        for (auto& e2p : detail::family_fiber(E2, Bo.i2, s2p)) {
                            const std::string via =
                                F.total.arrow(rho).at(
                                    chosen[a].at(s2).at(E2.total.arrow(sigma).at(e2p)));
                            if (chosen[b].at(s2p).at(e2p) != via) return false;
                        }
                    }
                }
            return true;
        };
        std::function<void(size_t)> rec2 = [&](size_t k) {
            if (k == xs.size()) {
                found.push_back(chosen);
                return;
            }
            for (auto& c : cands[k]) {
                chosen[k] = c;
                bool ok = true;
                for (size_t a = 0; a <= k && ok; ++a)
                    for (size_t b = 0; b <= k && ok; ++b)
                        if (!compatible(a, b)) ok = false;
                if (ok) rec2(k + 1);
            }
        };
        rec2(0);
        return std::pair(xs, found);
    };

    // assemble the family E1 with canonical element names
    std::map<std::string, FinSet> totals;
    std::map<std::string, FinMap> structures;
    // store decoded limit data for transitions and for Xi
    std::map<std::string,
             std::map<std::string, std::pair<std::string, std::vector<std::map<
                                                 std::string, std::map<std::string, std::string>>>>>>
        decoded; // obj -> element name -> (s1, components)

    auto encode = [&](const std::string& s1,
                      const std::vector<XObj>& xs,
                      const std::vector<std::map<std::string, std::map<std::string, std::string>>>&
                          comps) {
        std::string s = s1 + "|";
        for (size_t k = 0; k < xs.size(); ++k) {
            s += key(std::vector<std::string>{xs[k].i2, xs[k].j, xs[k].a1, xs[k].a2}) + "{";
            for (auto& [s2, t] : comps[k]) {
                s += s2 + ":[";
                for (auto& [e, v] : t) s += e + ">" + v + ";";
                s += "]";
            }
            s += "}";
        }
        return s;
    };

    for (auto& i1 : I.objects()) {
        std::vector<std::string> elts;
        std::map<std::string, std::string> st;
        auto& dec = decoded[i1];
        for (auto& s1 : f.s1.at(i1).elements) {
            auto [xs, families] = limit_elements(i1, s1);
            for (auto& fam : families) {
                std::string name = encode(s1, xs, fam);
                elts.push_back(name);
                st[name] = s1;
                dec[name] = {s1, fam};
            }
        }
        totals[i1] = FinSet(elts);
        structures[i1] = FinMap(totals[i1], f.s1.at(i1), std::move(st));
    }
    std::map<std::string, FinMap> arrows;
    for (auto& m : I.morphisms()) {
        // transition along beta: restrict the family along precomposition of a1
        std::map<std::string, std::string> t;
        auto xs_dst = xobjects(m.dst);
        auto xs_src = xobjects(m.src);
        for (auto& [name, data] : decoded[m.src]) {
            auto& [s1, comps] = data;
            const std::string s1p = f.s1.arrow(m.id).at(s1);
            std::vector<std::map<std::string, std::map<std::string, std::string>>> out(
                xs_dst.size());
            for (size_t k = 0; k < xs_dst.size(); ++k) {
                const XObj& xo = xs_dst[k];
                const std::string pre = I.compose(xo.a1, m.id);
                // find index in xs_src with (i2, j, pre, a2)
                size_t ix = SIZE_MAX;
                for (size_t z = 0; z < xs_src.size(); ++z)
                    if (xs_src[z].i2 == xo.i2 && xs_src[z].j == xo.j && xs_src[z].a1 == pre &&
                        xs_src[z].a2 == xo.a2) {
                        ix = z;
                        break;
                    }
                require(ix != SIZE_MAX, "pointwise_multipullback: transition lookup failed");
                out[k] = comps[ix];
            }
            t[name] = encode(s1p, xs_dst, out);
            require(totals[m.dst].contains(t[name]),
                    "pointwise_multipullback: transition leaves the limit");
        }
        arrows[m.id] = FinMap(totals[m.src], totals[m.dst], std::move(t));
    }

    MultipullbackResult res;
    res.e1 = Family(f.s1, SetFunctor(I, totals, arrows), structures);
    for (auto& i : I.objects()) {
        auto& tab = res.xi[i];
        for (auto& [name, data] : decoded[i]) {
            auto& [s1, comps] = data;
            auto xs = xobjects(i);
            // locate (i2=i, j=i, a1=id, a2=id)
            size_t ix = SIZE_MAX;
            for (size_t z = 0; z < xs.size(); ++z)
                if (xs[z].i2 == i && xs[z].j == i && xs[z].a1 == I.identity_of(i) &&
                    xs[z].a2 == I.identity_of(i)) {
                    ix = z;
                    break;
                }
            require(ix != SIZE_MAX, "pointwise_multipullback: identity component missing");
            for (auto& e2 : E2.total.at(i).elements)
                tab[key(name, e2)] = comps[ix].at(E2.structure.at(i).at(e2)).at(e2);
        }
    }
    return res;
}

/// All multimorphisms (E1', E2) -> F over f (natural families of fiberwise
/// maps). Used for the weak Cartesian bijection check.
inline std::vector<std::map<std::string, std::map<std::string, std::string>>> all_binary_homs(
    const BinaryMultiMor& f, const Family& E1, const Family& E2, const Family& F) {
    const FinCat& I = f.s1.shape;
    // per object: a map key(e1, e2) -> F-element over f(struct e1, struct e2)
    std::vector<std::map<std::string, std::map<std::string, std::string>>> out;
    const auto& obs = I.objects();
    std::map<std::string, std::map<std::string, std::string>> cur;
    std::function<void(size_t)> rec = [&](size_t k) {
        if (k == obs.size()) {
            for (auto& m : I.morphisms()) {
                for (auto& e1 : E1.total.at(m.src).elements)
                    for (auto& e2 : E2.total.at(m.src).elements) {
                        const std::string lhs =
                            F.total.arrow(m.id).at(cur.at(m.src).at(key(e1, e2)));
                        const std::string rhs = cur.at(m.dst).at(
                            key(E1.total.arrow(m.id).at(e1), E2.total.arrow(m.id).at(e2)));
                        if (lhs != rhs) return;
                    }
            }
            out.push_back(cur);
            return;
        }
        const std::string& i = obs[k];
        std::vector<std::pair<std::string, std::vector<std::string>>> slots;
        for (auto& e1 : E1.total.at(i).elements)
            for (auto& e2 : E2.total.at(i).elements) {
                const std::string tb =
                    f.at(i, E1.structure.at(i).at(e1), E2.structure.at(i).at(e2));
                slots.push_back({key(e1, e2), detail::family_fiber(F, i, tb)});
                if (slots.back().second.empty()) return;
            }
        std::vector<size_t> idx(slots.size(), 0);
        if (slots.empty()) {
            cur[i] = {};
            rec(k + 1);
            cur.erase(i);
            return;
        }
        while (true) {
            std::map<std::string, std::string> t;
            for (size_t z = 0; z < slots.size(); ++z) t[slots[z].first] = slots[z].second[idx[z]];
            cur[i] = t;
            rec(k + 1);
            cur.erase(i);
            size_t j = 0;
            while (j < idx.size() && ++idx[j] == slots[j].second.size()) idx[j++] = 0;
            if (j == idx.size()) break;
        }
    };
    rec(0);
    return out;
}

/// All fiber morphisms E1' -> E1 over the identity of S1.
inline std::vector<std::map<std::string, FinMap>> all_family_maps(const Family& from,
                                                                  const Family& to) {
    require(from.base == to.base, "all_family_maps: bases differ");
    const FinCat& I = from.base.shape;
    std::vector<std::map<std::string, FinMap>> out;
    const auto& obs = I.objects();
    std::map<std::string, FinMap> cur;
    std::function<void(size_t)> rec = [&](size_t k) {
        if (k == obs.size()) {
            for (auto& m : I.morphisms())
                if (!(cur.at(m.dst).after(from.total.arrow(m.id)) ==
                      to.total.arrow(m.id).after(cur.at(m.src))))
                    return;
            out.push_back(cur);
            return;
        }
        const std::string& i = obs[k];
        std::vector<std::pair<std::string, std::vector<std::string>>> slots;
        for (auto& e : from.total.at(i).elements)
            slots.push_back(
                {e, detail::family_fiber(to, i, from.structure.at(i).at(e))});
        for (auto& s : slots)
            if (s.second.empty() && !slots.empty()) {
                // no fiberwise map possible
            }
        bool impossible = false;
        for (auto& s : slots)
            if (s.second.empty()) impossible = true;
        if (impossible) return;
        if (slots.empty()) {
            cur[i] = FinMap(from.total.at(i), to.total.at(i), {});
            rec(k + 1);
            cur.erase(i);
            return;
        }
        std::vector<size_t> idx(slots.size(), 0);
        while (true) {
            std::map<std::string, std::string> t;
            for (size_t z = 0; z < slots.size(); ++z) t[slots[z].first] = slots[z].second[idx[z]];
            cur[i] = FinMap(from.total.at(i), to.total.at(i), std::move(t));
            rec(k + 1);
            cur.erase(i);
            size_t j = 0;
            while (j < idx.size() && ++idx[j] == slots[j].second.size()) idx[j++] = 0;
            if (j == idx.size()) break;
        }
    };
    rec(0);
    return out;
}

/// Weak Cartesian check at slot 1: composition with Xi is a bijection
/// Hom_{id}(E1'; E1) -> Hom_f(E1', E2; F) for the supplied test object E1'.
inline bool multipullback_is_cartesian_for(const BinaryMultiMor& f, const MultipullbackResult& mp,
                                           const Family& E2, const Family& F, const Family& E1p) {
    auto lhs = all_family_maps(E1p, mp.e1);
    auto rhs = all_binary_homs(f, E1p, E2, F);
    if (lhs.size() != rhs.size()) return false;
    std::set<std::string> images, all;
    auto encode = [&](const std::map<std::string, std::map<std::string, std::string>>& h) {
        std::string s;
        for (auto& [i, t] : h) {
            s += i + "{";
            for (auto& [k, v] : t) s += k + ">" + v + ";";
            s += "}";
        }
        return s;
    };
    const FinCat& I = f.s1.shape;
    for (auto& phi : lhs) {
        std::map<std::string, std::map<std::string, std::string>> comp;
        for (auto& i : I.objects())
            for (auto& e1 : E1p.total.at(i).elements)
                for (auto& e2 : E2.total.at(i).elements)
                    comp[i][key(e1, e2)] = mp.xi.at(i).at(key(phi.at(i).at(e1), e2));
        images.insert(encode(comp));
    }
    for (auto& h : rhs) all.insert(encode(h));
    return images == all;
}

// ---------------------------------------------------------------------------
// Cartesian / coCartesian object detection in the families model

struct CartesianFlags {
    /// Per morphism of I mapping to an identity in E: is the transition square
    /// a pullback (Cartesian), is the total map a bijection (coCartesian)?
    std::map<std::string, bool> cartesian, cocartesian;
    bool all_cartesian = true, all_cocartesian = true;
    std::optional<std::string> cartesian_witness, cocartesian_witness;
};

inline CartesianFlags cartesian_objects(const Family& X, const Functor& e) {
    require(e.dom() == X.base.shape, "cartesian_objects: functor domain mismatch");
    CartesianFlags flags;
    const FinCat& I = X.base.shape;
    for (auto& m : I.morphisms()) {
        if (!e.cod().is_identity(e.mor(m.id))) continue;
        if (I.is_identity(m.id)) continue;
        // Cartesian: total(src) -> base(src) ×_{base(dst)} total(dst) bijective
        const FinMap& tr = X.total.arrow(m.id);
        const FinMap& br = X.base.arrow(m.id);
        std::set<std::string> pairs;
        for (auto& s : X.base.at(m.src).elements)
            for (auto& t : X.total.at(m.dst).elements)
                if (br.at(s) == X.structure.at(m.dst).at(t)) pairs.insert(key(s, t));
        std::set<std::string> hit;
        bool inj = true;
        for (auto& x : X.total.at(m.src).elements) {
            std::string p = key(X.structure.at(m.src).at(x), tr.at(x));
            if (!hit.insert(p).second) inj = false;
        }
        bool cart = inj && hit.size() == pairs.size();
        bool cocart = tr.bijective();
        flags.cartesian[m.id] = cart;
        flags.cocartesian[m.id] = cocart;
        if (!cart && flags.all_cartesian) {
            flags.all_cartesian = false;
            flags.cartesian_witness = m.id;
        }
        if (!cocart && flags.all_cocartesian) {
            flags.all_cocartesian = false;
            flags.cocartesian_witness = m.id;
        }
    }
    return flags;
}

// ---------------------------------------------------------------------------
// Weak D-equivalence for the concrete families instance

/// A morphism of S-diagrams over (·, S): alpha between the shapes, phi the
/// components F1 => F2 ∘ alpha, and augmentations pi1/pi2 into S.
struct SDiagramMorphism {
    SetFunctor d1, d2;
    Functor alpha;
    std::map<std::string, FinMap> phi;  ///< per object of d1.shape
    FinSet s;
    std::map<std::string, FinMap> aug1, aug2; ///< F1(i) -> S, F2(k) -> S

    static SDiagramMorphism make(SetFunctor d1, SetFunctor d2, Functor alpha,
                                 std::map<std::string, FinMap> phi, FinSet s,
                                 std::map<std::string, FinMap> aug1,
                                 std::map<std::string, FinMap> aug2) {
        SDiagramMorphism m{std::move(d1), std::move(d2), std::move(alpha), std::move(phi),
                           std::move(s),  std::move(aug1), std::move(aug2)};
        require(m.alpha.dom() == m.d1.shape && m.alpha.cod() == m.d2.shape,
                "SDiagramMorphism: alpha endpoints");
        for (auto& i : m.d1.shape.objects()) {
            require(m.phi.count(i), "SDiagramMorphism: missing component at " + i);
            require(m.phi.at(i).dom == m.d1.at(i) && m.phi.at(i).cod == m.d2.at(m.alpha.ob(i)),
                    "SDiagramMorphism: component endpoints at " + i);
        }
        for (auto& mor : m.d1.shape.morphisms())
            require(m.phi.at(mor.dst).after(m.d1.arrow(mor.id)) ==
                        m.d2.arrow(m.alpha.mor(mor.id)).after(m.phi.at(mor.src)),
                    "SDiagramMorphism: phi not natural at " + mor.id);
        for (auto& i : m.d1.shape.objects())
            require(m.aug2.at(m.alpha.ob(i)).after(m.phi.at(i)) == m.aug1.at(i),
                    "SDiagramMorphism: not a morphism over (·,S) at " + i);
        // augmentations must be cocones
        for (auto& mor : m.d1.shape.morphisms())
            require(m.aug1.at(mor.dst).after(m.d1.arrow(mor.id)) == m.aug1.at(mor.src),
                    "SDiagramMorphism: aug1 not a cocone at " + mor.id);
        for (auto& mor : m.d2.shape.morphisms())
            require(m.aug2.at(mor.dst).after(m.d2.arrow(mor.id)) == m.aug2.at(mor.src),
                    "SDiagramMorphism: aug2 not a cocone at " + mor.id);
        return m;
    }
};

struct WeakEquivVerdict {
    bool equivalence = true;
    /// Failing generator: the point s of S and a short reason.
    std::optional<std::string> witness;
};

namespace detail {

/// p_! p^* applied to the point family at s: classes of the fibered totals.
/// If coeq_objects is non-empty the colimit is the reflexive coequalizer
/// over those two parallel transitions (d0, d1 from level 1 to level 0);
/// otherwise the full colimit over the shape is used.
struct PointPush {
    std::map<std::string, std::string> cls; ///< key(i, x) -> class name
    std::set<std::string> classes;
};

inline PointPush point_push(const SetFunctor& d, const std::map<std::string, FinMap>& aug,
                            const std::string& s) {
    UnionFind uf;
    auto tag = [](const std::string& i, const std::string& x) { return key(i, x); };
    for (auto& i : d.shape.objects())
        for (auto& x : d.at(i).elements)
            if (aug.at(i).at(x) == s) uf.add(tag(i, x));
    for (auto& m : d.shape.morphisms())
        for (auto& x : d.at(m.src).elements)
            if (aug.at(m.src).at(x) == s)
                uf.unite(tag(m.src, x), tag(m.dst, d.arrow(m.id).at(x)));
    PointPush out;
    for (auto& i : d.shape.objects())
        for (auto& x : d.at(i).elements)
            if (aug.at(i).at(x) == s) {
                out.cls[tag(i, x)] = uf.find(tag(i, x));
                out.classes.insert(uf.find(tag(i, x)));
            }
    return out;
}

} // namespace detail

/// Checks that p1! p1^* -> p2! p2^* is invertible on every point family of
/// the fiber over S. Point families generate the slice under coproducts and
/// both composites preserve coproducts, so this suffices for all families
/// (cf. the module tests that verify the coproduct reduction on instances).
inline WeakEquivVerdict weak_d_equiv(const SDiagramMorphism& m) {
    WeakEquivVerdict v;
    for (auto& s : m.s.elements) {
        detail::PointPush a = detail::point_push(m.d1, m.aug1, s);
        detail::PointPush b = detail::point_push(m.d2, m.aug2, s);
        // induced map on classes: [i, x] -> [alpha(i), phi_i(x)]
        std::map<std::string, std::string> induced;
        bool ok = true;
        for (auto& [t, c] : a.cls) {
            // decode i, x by scanning (tags are generated by us)
            // store decoded pairs instead: re-derive by iterating the diagram
            (void)t;
            (void)c;
        }
        std::set<std::string> image;
        std::map<std::string, std::string> map_on_classes;
        for (auto& i : m.d1.shape.objects())
            for (auto& x : m.d1.at(i).elements) {
                if (m.aug1.at(i).at(x) != s) continue;
                const std::string from = a.cls.at(key(i, x));
                const std::string to = b.cls.at(key(m.alpha.ob(i), m.phi.at(i).at(x)));
                auto it = map_on_classes.find(from);
                if (it != map_on_classes.end() && it->second != to) {
                    ok = false; // not well-defined would indicate a bug
                    break;
                }
                map_on_classes[from] = to;
                image.insert(to);
            }
        if (!ok || map_on_classes.size() != a.classes.size() || image.size() != a.classes.size() ||
            image.size() != b.classes.size()) {
            v.equivalence = false;
            v.witness = "point " + s;
            return v;
        }
    }
    return v;
}

} // namespace catkit::kan
