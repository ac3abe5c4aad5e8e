#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "catkit/core.hpp"

namespace catkit::fincat {

struct Mor {
    std::string id, src, dst;
    friend bool operator==(const Mor&, const Mor&) = default;
    friend auto operator<=>(const Mor&, const Mor&) = default;
};

/// A finite category given by total object/morphism/composition tables.
/// Validation is exhaustive: unit laws on every morphism and associativity
/// on every composable triple. Instances are immutable once built.
class FinCat {
  public:
    FinCat() = default;

    static FinCat make(std::vector<std::string> objects,
                       std::vector<Mor> morphisms,
                       std::map<std::string, std::string> identity,
                       const std::vector<std::array<std::string, 3>>& compose) {
        FinCat c;
        c.objects_ = std::move(objects);
        c.mors_ = std::move(morphisms);
        for (size_t i = 0; i < c.objects_.size(); ++i) {
            require(!c.ob_ix_.count(c.objects_[i]), "duplicate object id " + c.objects_[i]);
            c.ob_ix_[c.objects_[i]] = static_cast<int>(i);
        }
        for (size_t i = 0; i < c.mors_.size(); ++i) {
            const Mor& m = c.mors_[i];
            require(!c.mor_ix_.count(m.id), "duplicate morphism id " + m.id);
            require(c.ob_ix_.count(m.src), "morphism " + m.id + ": unknown source " + m.src);
            require(c.ob_ix_.count(m.dst), "morphism " + m.id + ": unknown target " + m.dst);
            c.mor_ix_[m.id] = static_cast<int>(i);
        }
        c.identity_.assign(c.objects_.size(), -1);
        for (auto& [ob, mid] : identity) {
            require(c.ob_ix_.count(ob), "identity table: unknown object " + ob);
            require(c.mor_ix_.count(mid), "identity table: unknown morphism " + mid);
            const Mor& m = c.mors_[c.mor_ix_[mid]];
            require(m.src == ob && m.dst == ob, "identity of " + ob + " must be an endomorphism");
            c.identity_[c.ob_ix_[ob]] = c.mor_ix_[mid];
        }
        for (size_t i = 0; i < c.objects_.size(); ++i)
            require(c.identity_[i] >= 0, "missing identity for object " + c.objects_[i]);
        const size_t m = c.mors_.size();
        c.comp_.assign(m * m, -1);
        for (auto& [g, f, h] : compose) {
            require(c.mor_ix_.count(g) && c.mor_ix_.count(f) && c.mor_ix_.count(h),
                    "compose table: unknown morphism in (" + g + "," + f + "," + h + ")");
            int gi = c.mor_ix_[g], fi = c.mor_ix_[f], hi = c.mor_ix_[h];
            require(c.mors_[fi].dst == c.mors_[gi].src,
                    "compose table: " + g + " after " + f + " is not composable");
            require(c.mors_[hi].src == c.mors_[fi].src && c.mors_[hi].dst == c.mors_[gi].dst,
                    "compose table: endpoints of " + h + " do not match " + g + " after " + f);
            c.comp_[gi * m + fi] = hi;
        }
        c.validate();
        return c;
    }

    const std::vector<std::string>& objects() const { return objects_; }
    const std::vector<Mor>& morphisms() const { return mors_; }

    bool has_object(const std::string& ob) const { return ob_ix_.count(ob) != 0; }
    bool has_morphism(const std::string& m) const { return mor_ix_.count(m) != 0; }

    const Mor& mor(const std::string& id) const {
        auto it = mor_ix_.find(id);
        require(it != mor_ix_.end(), "unknown morphism " + id);
        return mors_[it->second];
    }

    const std::string& identity_of(const std::string& ob) const {
        auto it = ob_ix_.find(ob);
        require(it != ob_ix_.end(), "unknown object " + ob);
        return mors_[identity_[it->second]].id;
    }

    bool is_identity(const std::string& m) const {
        const Mor& mm = mor(m);
        return identity_of(mm.src) == m;
    }

    /// g∘f; requires dst(f) == src(g).
    const std::string& compose(const std::string& g, const std::string& f) const {
        int gi = mor_ix_.at(g), fi = mor_ix_.at(f);
        int hi = comp_[gi * mors_.size() + fi];
        require(hi >= 0, "morphisms not composable: " + g + " after " + f);
        return mors_[hi].id;
    }

    std::vector<std::string> hom(const std::string& a, const std::string& b) const {
        std::vector<std::string> out;
        for (const Mor& m : mors_)
            if (m.src == a && m.dst == b) out.push_back(m.id);
        return out;
    }

    bool is_iso(const std::string& m) const {
        const Mor& mm = mor(m);
        for (const std::string& n : hom(mm.dst, mm.src))
            if (compose(n, m) == identity_of(mm.src) && compose(m, n) == identity_of(mm.dst))
                return true;
        return false;
    }

    std::optional<std::string> inverse(const std::string& m) const {
        const Mor& mm = mor(m);
        for (const std::string& n : hom(mm.dst, mm.src))
            if (compose(n, m) == identity_of(mm.src) && compose(m, n) == identity_of(mm.dst))
                return n;
        return std::nullopt;
    }

    friend bool operator==(const FinCat& a, const FinCat& b) {
        return a.objects_ == b.objects_ && a.mors_ == b.mors_ && a.identity_ == b.identity_ &&
               a.comp_ == b.comp_;
    }

  private:
    void validate() const {
        const size_t m = mors_.size();
        for (size_t f = 0; f < m; ++f)
            for (size_t g = 0; g < m; ++g) {
                bool composable = mors_[f].dst == mors_[g].src;
                bool defined = comp_[g * m + f] >= 0;
                require(defined == composable,
                        std::string("compose table must be defined exactly on composable pairs; "
                                    "offender: ") +
                            mors_[g].id + " after " + mors_[f].id);
            }
        for (size_t f = 0; f < m; ++f) {
            int l = comp_[static_cast<size_t>(identity_[ob_ix_.at(mors_[f].dst)]) * m + f];
            int r = comp_[f * m + identity_[ob_ix_.at(mors_[f].src)]];
            require(l == static_cast<int>(f) && r == static_cast<int>(f),
                    "unit law fails at morphism " + mors_[f].id);
        }
        for (size_t f = 0; f < m; ++f)
            for (size_t g = 0; g < m; ++g) {
                if (mors_[f].dst != mors_[g].src) continue;
                int gf = comp_[g * m + f];
                for (size_t h = 0; h < m; ++h) {
                    if (mors_[g].dst != mors_[h].src) continue;
                    int hg = comp_[h * m + g];
                    require(comp_[h * m + gf] == comp_[static_cast<size_t>(hg) * m + f],
                            "associativity fails on (" + mors_[h].id + "," + mors_[g].id + "," +
                                mors_[f].id + ")");
                }
            }
    }

    std::vector<std::string> objects_;
    std::vector<Mor> mors_;
    std::map<std::string, int> ob_ix_, mor_ix_;
    std::vector<int> identity_;
    std::vector<int> comp_;
};

// ---------------------------------------------------------------------------
// Standard constructions

/// The poset {0 < 1 < ... < n} as a category. Morphism "i->j" for i <= j.
inline FinCat delta(int n) {
    std::vector<std::string> obs;
    std::vector<Mor> ms;
    std::map<std::string, std::string> ids;
    std::vector<std::array<std::string, 3>> comp;
    auto nm = [](int i, int j) { return std::to_string(i) + "->" + std::to_string(j); };
    for (int i = 0; i <= n; ++i) {
        obs.push_back(std::to_string(i));
        ids[std::to_string(i)] = nm(i, i);
    }
    for (int i = 0; i <= n; ++i)
        for (int j = i; j <= n; ++j) ms.push_back({nm(i, j), std::to_string(i), std::to_string(j)});
    for (int i = 0; i <= n; ++i)
        for (int j = i; j <= n; ++j)
            for (int k = j; k <= n; ++k) comp.push_back({nm(j, k), nm(i, j), nm(i, k)});
    return FinCat::make(obs, ms, ids, comp);
}

inline FinCat point() { return delta(0); }

inline FinCat discrete(const std::vector<std::string>& names) {
    std::vector<Mor> ms;
    std::map<std::string, std::string> ids;
    for (auto& o : names) {
        ms.push_back({"id_" + o, o, o});
        ids[o] = "id_" + o;
    }
    std::vector<std::array<std::string, 3>> comp;
    for (auto& o : names) comp.push_back({"id_" + o, "id_" + o, "id_" + o});
    return FinCat::make(names, ms, ids, comp);
}

inline FinCat opposite(const FinCat& c) {
    std::vector<Mor> ms;
    for (const Mor& m : c.morphisms()) ms.push_back({m.id, m.dst, m.src});
    std::map<std::string, std::string> ids;
    for (auto& o : c.objects()) ids[o] = c.identity_of(o);
    std::vector<std::array<std::string, 3>> comp;
    for (const Mor& f : c.morphisms())
        for (const Mor& g : c.morphisms())
            if (f.src == g.dst) // composable in the opposite
                comp.push_back({g.id, f.id, c.compose(f.id, g.id)});
    return FinCat::make(c.objects(), ms, ids, comp);
}

inline FinCat product(const FinCat& a, const FinCat& b) {
    std::vector<std::string> obs;
    for (auto& x : a.objects())
        for (auto& y : b.objects()) obs.push_back(key(x, y));
    std::vector<Mor> ms;
    for (const Mor& f : a.morphisms())
        for (const Mor& g : b.morphisms())
            ms.push_back({key(f.id, g.id), key(f.src, g.src), key(f.dst, g.dst)});
    std::map<std::string, std::string> ids;
    for (auto& x : a.objects())
        for (auto& y : b.objects()) ids[key(x, y)] = key(a.identity_of(x), b.identity_of(y));
    std::vector<std::array<std::string, 3>> comp;
    for (const Mor& f : a.morphisms())
        for (const Mor& g : b.morphisms())
            for (const Mor& f2 : a.morphisms()) {
                if (f.dst != f2.src) continue;
                for (const Mor& g2 : b.morphisms()) {
                    if (g.dst != g2.src) continue;
                    comp.push_back({key(f2.id, g2.id), key(f.id, g.id),
                                    key(a.compose(f2.id, f.id), b.compose(g2.id, g.id))});
                }
            }
    return FinCat::make(obs, ms, ids, comp);
}

inline FinCat coproduct(const FinCat& a, const FinCat& b) {
    auto tag = [](const std::string& t, const std::string& s) { return key(t, s); };
    std::vector<std::string> obs;
    std::vector<Mor> ms;
    std::map<std::string, std::string> ids;
    std::vector<std::array<std::string, 3>> comp;
    auto add = [&](const FinCat& c, const std::string& t) {
        for (auto& o : c.objects()) obs.push_back(tag(t, o));
        for (const Mor& m : c.morphisms()) ms.push_back({tag(t, m.id), tag(t, m.src), tag(t, m.dst)});
        for (auto& o : c.objects()) ids[tag(t, o)] = tag(t, c.identity_of(o));
        for (const Mor& f : c.morphisms())
            for (const Mor& g : c.morphisms())
                if (f.dst == g.src)
                    comp.push_back({tag(t, g.id), tag(t, f.id), tag(t, c.compose(g.id, f.id))});
    };
    add(a, "l");
    add(b, "r");
    return FinCat::make(obs, ms, ids, comp);
}

inline std::optional<std::string> find_final(const FinCat& c) {
    for (auto& e : c.objects()) {
        bool ok = true;
        for (auto& x : c.objects())
            if (c.hom(x, e).size() != 1) { ok = false; break; }
        if (ok) return e;
    }
    return std::nullopt;
}

inline std::optional<std::string> find_initial(const FinCat& c) {
    for (auto& e : c.objects()) {
        bool ok = true;
        for (auto& x : c.objects())
            if (c.hom(e, x).size() != 1) { ok = false; break; }
        if (ok) return e;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Functors and natural transformations

class Functor {
  public:
    Functor() = default;

    static Functor make(FinCat dom, FinCat cod, std::map<std::string, std::string> on_obj,
                        std::map<std::string, std::string> on_mor) {
        Functor f;
        f.dom_ = std::move(dom);
        f.cod_ = std::move(cod);
        f.on_obj_ = std::move(on_obj);
        f.on_mor_ = std::move(on_mor);
        f.validate();
        return f;
    }

    static Functor identity(const FinCat& c) {
        std::map<std::string, std::string> oo, om;
        for (auto& o : c.objects()) oo[o] = o;
        for (const Mor& m : c.morphisms()) om[m.id] = m.id;
        return make(c, c, oo, om);
    }

    /// Constant functor with value `ob` in `cod`.
    static Functor constant(const FinCat& dom, const FinCat& cod, const std::string& ob) {
        std::map<std::string, std::string> oo, om;
        for (auto& o : dom.objects()) oo[o] = ob;
        for (const Mor& m : dom.morphisms()) om[m.id] = cod.identity_of(ob);
        return make(dom, cod, oo, om);
    }

    const FinCat& dom() const { return dom_; }
    const FinCat& cod() const { return cod_; }

    const std::string& ob(const std::string& o) const {
        auto it = on_obj_.find(o);
        require(it != on_obj_.end(), "functor undefined on object " + o);
        return it->second;
    }
    const std::string& mor(const std::string& m) const {
        auto it = on_mor_.find(m);
        require(it != on_mor_.end(), "functor undefined on morphism " + m);
        return it->second;
    }

    const std::map<std::string, std::string>& on_obj() const { return on_obj_; }
    const std::map<std::string, std::string>& on_mor() const { return on_mor_; }

    /// this ∘ g.
    Functor after(const Functor& g) const {
        require(g.cod_ == dom_, "Functor::after: domains do not match");
        std::map<std::string, std::string> oo, om;
        for (auto& [o, v] : g.on_obj_) oo[o] = ob(v);
        for (auto& [m, v] : g.on_mor_) om[m] = mor(v);
        return make(g.dom_, cod_, oo, om);
    }

    Functor opposite_functor() const {
        return make(fincat::opposite(dom_), fincat::opposite(cod_), on_obj_, on_mor_);
    }

    friend bool operator==(const Functor& a, const Functor& b) {
        return a.dom_ == b.dom_ && a.cod_ == b.cod_ && a.on_obj_ == b.on_obj_ &&
               a.on_mor_ == b.on_mor_;
    }

  private:
    void validate() const {
        for (auto& o : dom_.objects()) {
            auto it = on_obj_.find(o);
            require(it != on_obj_.end(), "functor missing object " + o);
            require(cod_.has_object(it->second), "functor image unknown: " + it->second);
        }
        for (const Mor& m : dom_.morphisms()) {
            auto it = on_mor_.find(m.id);
            require(it != on_mor_.end(), "functor missing morphism " + m.id);
            const Mor& im = cod_.mor(it->second);
            require(im.src == ob(m.src) && im.dst == ob(m.dst),
                    "functor breaks endpoints at " + m.id);
        }
        for (auto& o : dom_.objects())
            require(mor(dom_.identity_of(o)) == cod_.identity_of(ob(o)),
                    "functor breaks identity at " + o);
        for (const Mor& f : dom_.morphisms())
            for (const Mor& g : dom_.morphisms())
                if (f.dst == g.src)
                    require(mor(dom_.compose(g.id, f.id)) == cod_.compose(mor(g.id), mor(f.id)),
                            "functor breaks composition on (" + g.id + "," + f.id + ")");
    }

    FinCat dom_, cod_;
    std::map<std::string, std::string> on_obj_, on_mor_;
};

class NatTrans {
  public:
    NatTrans() = default;

    static NatTrans make(Functor src, Functor tgt, std::map<std::string, std::string> components) {
        NatTrans n;
        n.src_ = std::move(src);
        n.tgt_ = std::move(tgt);
        n.comp_ = std::move(components);
        n.validate();
        return n;
    }

    static NatTrans identity(const Functor& f) {
        std::map<std::string, std::string> c;
        for (auto& o : f.dom().objects()) c[o] = f.cod().identity_of(f.ob(o));
        return make(f, f, c);
    }

    const Functor& src() const { return src_; }
    const Functor& tgt() const { return tgt_; }
    const std::string& at(const std::string& o) const {
        auto it = comp_.find(o);
        require(it != comp_.end(), "natural transformation missing component at " + o);
        return it->second;
    }
    const std::map<std::string, std::string>& components() const { return comp_; }

    /// Vertical composition: this ∘ other (other: F => G, this: G => H).
    NatTrans vert(const NatTrans& other) const {
        require(other.tgt_ == src_, "NatTrans::vert: not composable");
        std::map<std::string, std::string> c;
        for (auto& o : src_.dom().objects()) c[o] = src_.cod().compose(at(o), other.at(o));
        return make(other.src_, tgt_, c);
    }

    friend bool operator==(const NatTrans& a, const NatTrans& b) {
        return a.src_ == b.src_ && a.tgt_ == b.tgt_ && a.comp_ == b.comp_;
    }

  private:
    void validate() const {
        require(src_.dom() == tgt_.dom() && src_.cod() == tgt_.cod(),
                "natural transformation endpoints must be parallel functors");
        const FinCat& d = src_.dom();
        const FinCat& c = src_.cod();
        for (auto& o : d.objects()) {
            const Mor& m = c.mor(at(o));
            require(m.src == src_.ob(o) && m.dst == tgt_.ob(o),
                    "component at " + o + " has wrong endpoints");
        }
        for (const Mor& m : d.morphisms())
            require(c.compose(at(m.dst), src_.mor(m.id)) == c.compose(tgt_.mor(m.id), at(m.src)),
                    "naturality square fails at " + m.id);
    }

    Functor src_, tgt_;
    std::map<std::string, std::string> comp_;
};

// ---------------------------------------------------------------------------
// Slice (comma) categories

struct SliceResult {
    FinCat cat;        ///< objects (k,i,m) with m : alpha(i) -> beta(k)
    Functor proj_first;  ///< to K (a Grothendieck fibration)
    Functor proj_second; ///< to I (a Grothendieck opfibration)
    NatTrans mu;         ///< alpha ∘ proj_second => beta ∘ proj_first
};

/// K ×_{/J} I for alpha : I -> J, beta : K -> J: triples (k, i, m: alpha(i) -> beta(k)).
inline SliceResult slice(const Functor& alpha, const Functor& beta) {
    require(alpha.cod() == beta.cod(), "slice: functors must share their codomain");
    const FinCat& I = alpha.dom();
    const FinCat& K = beta.dom();
    const FinCat& J = alpha.cod();

    std::vector<std::string> obs;
    std::map<std::string, std::array<std::string, 3>> ob_data; // id -> (k,i,m)
    for (auto& k : K.objects())
        for (auto& i : I.objects())
            for (auto& m : J.hom(alpha.ob(i), beta.ob(k))) {
                std::string id = key(k, i, m);
                obs.push_back(id);
                ob_data[id] = {k, i, m};
            }

    std::vector<Mor> ms;
    std::map<std::string, std::array<std::string, 2>> mor_data; // id -> (kappa, lambda)
    std::map<std::string, std::string> ids;
    for (auto& a : obs)
        for (auto& b : obs) {
            auto& [ka, ia, ma] = ob_data[a];
            auto& [kb, ib, mb] = ob_data[b];
            for (auto& kap : K.hom(ka, kb))
                for (auto& lam : I.hom(ia, ib)) {
                    // square: mb ∘ alpha(lam) == beta(kap) ∘ ma
                    if (J.compose(mb, alpha.mor(lam)) != J.compose(beta.mor(kap), ma)) continue;
                    std::string id = key(a + "=>" + b, kap, lam);
                    ms.push_back({id, a, b});
                    mor_data[id] = {kap, lam};
                    if (a == b && kap == K.identity_of(ka) && lam == I.identity_of(ia)) ids[a] = id;
                }
        }
    std::vector<std::array<std::string, 3>> comp;
    for (const Mor& f : ms)
        for (const Mor& g : ms) {
            if (f.dst != g.src) continue;
            auto& [kf, lf] = mor_data[f.id];
            auto& [kg, lg] = mor_data[g.id];
            comp.push_back({g.id, f.id,
                            key(f.src + "=>" + g.dst, K.compose(kg, kf), I.compose(lg, lf))});
        }
    FinCat cat = FinCat::make(obs, ms, ids, comp);

    std::map<std::string, std::string> pk_o, pk_m, pi_o, pi_m, mu_c;
    for (auto& o : obs) {
        auto& [k, i, m] = ob_data[o];
        pk_o[o] = k;
        pi_o[o] = i;
        mu_c[o] = m;
    }
    for (const Mor& mm : ms) {
        auto& [kap, lam] = mor_data[mm.id];
        pk_m[mm.id] = kap;
        pi_m[mm.id] = lam;
    }
    Functor pk = Functor::make(cat, K, pk_o, pk_m);
    Functor pi = Functor::make(cat, I, pi_o, pi_m);
    NatTrans mu = NatTrans::make(alpha.after(pi), beta.after(pk), mu_c);
    return {cat, pk, pi, mu};
}

/// I ×_{/J} j : objects (i, m: alpha(i) -> j). Projection functor included.
inline SliceResult slice_over(const Functor& alpha, const std::string& j) {
    Functor pt = Functor::constant(point(), alpha.cod(), j);
    return slice(alpha, pt); // K = point
}

/// j ×_{/J} I : objects (i, m: j -> alpha(i)).
inline SliceResult slice_under(const Functor& alpha, const std::string& j) {
    Functor pt = Functor::constant(point(), alpha.cod(), j);
    SliceResult s = slice(pt, alpha); // alpha-argument of `slice` is the point inclusion
    return s;
}

// ---------------------------------------------------------------------------
// Fibration checking (Appendix-style Cartesian lifts, checked exhaustively)

/// xi : E' -> E over f := pi(xi) is Cartesian iff for all g : R -> src(f) in B
/// and all F over R, composition with xi is a bijection
/// Hom_g(F, E') -> Hom_{f∘g}(F, E).
inline bool is_cartesian(const Functor& pi, const std::string& xi) {
    const FinCat& E = pi.dom();
    const FinCat& B = pi.cod();
    const Mor& x = E.mor(xi);
    const std::string f = pi.mor(xi);
    const std::string S = B.mor(f).src;
    for (const Mor& g : B.morphisms()) {
        if (g.dst != S) continue;
        const std::string fg = B.compose(f, g.id);
        for (auto& F : E.objects()) {
            if (pi.ob(F) != g.src) continue;
            std::set<std::string> images;
            size_t count = 0;
            for (auto& phi : E.hom(F, x.src)) {
                if (pi.mor(phi) != g.id) continue;
                ++count;
                images.insert(E.compose(xi, phi));
            }
            size_t target = 0;
            for (auto& psi : E.hom(F, x.dst))
                if (pi.mor(psi) == fg) ++target;
            if (images.size() != count || images.size() != target) return false;
        }
    }
    return true;
}

/// xi : E -> E' over f is coCartesian iff for all g : dst(f) -> U and F over U,
/// composition with xi is a bijection Hom_g(E', F) -> Hom_{g∘f}(E, F).
inline bool is_cocartesian(const Functor& pi, const std::string& xi) {
    const FinCat& E = pi.dom();
    const FinCat& B = pi.cod();
    const Mor& x = E.mor(xi);
    const std::string f = pi.mor(xi);
    const std::string T = B.mor(f).dst;
    for (const Mor& g : B.morphisms()) {
        if (g.src != T) continue;
        const std::string gf = B.compose(g.id, f);
        for (auto& F : E.objects()) {
            if (pi.ob(F) != g.dst) continue;
            std::set<std::string> images;
            size_t count = 0;
            for (auto& phi : E.hom(x.dst, F)) {
                if (pi.mor(phi) != g.id) continue;
                ++count;
                images.insert(E.compose(phi, xi));
            }
            size_t target = 0;
            for (auto& psi : E.hom(x.src, F))
                if (pi.mor(psi) == gf) ++target;
            if (images.size() != count || images.size() != target) return false;
        }
    }
    return true;
}

struct LiftFailure {
    std::string base_mor;  ///< f in the base
    std::string over_obj;  ///< object over the relevant end of f
};

struct FibrationReport {
    bool fibration = false;
    bool opfibration = false;
    /// Chosen lifts, keyed by key(f, E): lexicographically least (co)Cartesian lift.
    std::map<std::string, std::string> cart_lift;
    std::map<std::string, std::string> cocart_lift;
    std::optional<LiftFailure> cart_failure, cocart_failure;
    bool bifibration() const { return fibration && opfibration; }
};

inline FibrationReport check_fibration(const Functor& pi) {
    const FinCat& E = pi.dom();
    const FinCat& B = pi.cod();
    FibrationReport rep;
    rep.fibration = true;
    rep.opfibration = true;
    for (const Mor& f : B.morphisms()) {
        for (auto& T : E.objects()) {
            if (pi.ob(T) != f.dst) continue;
            std::optional<std::string> found;
            for (const Mor& cand : E.morphisms()) {
                if (cand.dst != T || pi.mor(cand.id) != f.id) continue;
                if (is_cartesian(pi, cand.id)) {
                    if (!found || cand.id < *found) found = cand.id;
                }
            }
            if (found)
                rep.cart_lift[key(f.id, T)] = *found;
            else if (rep.fibration) {
                rep.fibration = false;
                rep.cart_failure = LiftFailure{f.id, T};
            }
        }
        for (auto& S : E.objects()) {
            if (pi.ob(S) != f.src) continue;
            std::optional<std::string> found;
            for (const Mor& cand : E.morphisms()) {
                if (cand.src != S || pi.mor(cand.id) != f.id) continue;
                if (is_cocartesian(pi, cand.id)) {
                    if (!found || cand.id < *found) found = cand.id;
                }
            }
            if (found)
                rep.cocart_lift[key(f.id, S)] = *found;
            else if (rep.opfibration) {
                rep.opfibration = false;
                rep.cocart_failure = LiftFailure{f.id, S};
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Cleavage: associated pseudo-functor data of a (op)fibration

/// The full subcategory of E over a base object (morphisms over the identity).
inline FinCat fiber_category(const Functor& pi, const std::string& base_ob) {
    const FinCat& E = pi.dom();
    std::vector<std::string> obs;
    for (auto& o : E.objects())
        if (pi.ob(o) == base_ob) obs.push_back(o);
    std::vector<Mor> ms;
    std::map<std::string, std::string> ids;
    std::vector<std::array<std::string, 3>> comp;
    for (const Mor& m : E.morphisms())
        if (pi.mor(m.id) == pi.cod().identity_of(base_ob) && pi.ob(m.src) == base_ob &&
            pi.ob(m.dst) == base_ob)
            ms.push_back(m);
    for (auto& o : obs) ids[o] = E.identity_of(o);
    for (const Mor& f : ms)
        for (const Mor& g : ms)
            if (f.dst == g.src) comp.push_back({g.id, f.id, E.compose(g.id, f.id)});
    return FinCat::make(obs, ms, ids, comp);
}

struct Cleavage {
    bool contravariant = true; ///< true: pullback functors of a fibration
    std::map<std::string, FinCat> fiber;     ///< per base object
    std::map<std::string, Functor> transport; ///< per base morphism f
    /// Coherence isomorphism for composable g∘f, keyed key(g,f); for a
    /// fibration: f^• ∘ g^• => (g∘f)^• as a NatTrans between fiber functors.
    std::map<std::string, NatTrans> coherence;
    bool cocycle_ok = false;
};

/// Deterministic cleavage of a fibration (direction="cart") or opfibration
/// ("cocart"): transports via the lexicographically least lifts recorded in
/// the report, coherence isomorphisms solved from the universal property, and
/// the cocycle condition replayed on all composable triples.
inline Cleavage cleavage(const Functor& pi, const FibrationReport& rep, bool cartesian_direction) {
    require(cartesian_direction ? rep.fibration : rep.opfibration,
            "cleavage: requested direction not established by check_fibration");
    const FinCat& E = pi.dom();
    const FinCat& B = pi.cod();
    Cleavage cl;
    cl.contravariant = cartesian_direction;
    for (auto& b : B.objects()) cl.fiber.emplace(b, fiber_category(pi, b));

    auto lift_of = [&](const std::string& f, const std::string& ob) -> const std::string& {
        const auto& table = cartesian_direction ? rep.cart_lift : rep.cocart_lift;
        auto it = table.find(key(f, ob));
        require(it != table.end(), "cleavage: missing lift for " + key(f, ob));
        return it->second;
    };

    // Unique fiber morphism u with: cart: lift_tgt ∘ u = phi ∘ lift_src;
    // cocart: u ∘ lift_src = lift_tgt ∘ phi  (solved by exhaustive search).
    auto solve = [&](const std::string& want_src, const std::string& want_dst,
                     const std::string& base_ob,
                     const std::function<bool(const std::string&)>& eq) -> std::string {
        std::optional<std::string> found;
        for (auto& u : E.hom(want_src, want_dst)) {
            if (pi.mor(u) != B.identity_of(base_ob)) continue;
            if (eq(u)) {
                require(!found, "cleavage: universal factorization not unique");
                found = u;
            }
        }
        require(found.has_value(), "cleavage: universal factorization not found");
        return *found;
    };

    for (const Mor& f : B.morphisms()) {
        const std::string &S = f.src, &T = f.dst;
        const FinCat& fib_src = cl.fiber.at(cartesian_direction ? T : S);
        const FinCat& fib_dst = cl.fiber.at(cartesian_direction ? S : T);
        std::map<std::string, std::string> oo, om;
        for (auto& ob : fib_src.objects()) {
            const std::string& l = lift_of(f.id, ob);
            oo[ob] = cartesian_direction ? E.mor(l).src : E.mor(l).dst;
        }
        for (const Mor& phi : fib_src.morphisms()) {
            if (cartesian_direction) {
                const std::string &l1 = lift_of(f.id, phi.src), &l2 = lift_of(f.id, phi.dst);
                om[phi.id] = solve(oo[phi.src], oo[phi.dst], S, [&](const std::string& u) {
                    return E.compose(l2, u) == E.compose(phi.id, l1);
                });
            } else {
                const std::string &l1 = lift_of(f.id, phi.src), &l2 = lift_of(f.id, phi.dst);
                om[phi.id] = solve(oo[phi.src], oo[phi.dst], T, [&](const std::string& u) {
                    return E.compose(u, l1) == E.compose(l2, phi.id);
                });
            }
        }
        cl.transport.emplace(f.id, Functor::make(fib_src, fib_dst, oo, om));
    }

    // Coherence isomorphisms and cocycle condition.
    cl.cocycle_ok = true;
    for (const Mor& f : B.morphisms())
        for (const Mor& g : B.morphisms()) {
            if (f.dst != g.src) continue;
            const std::string gf = B.compose(g.id, f.id);
            const Functor& Tf = cl.transport.at(f.id);
            const Functor& Tg = cl.transport.at(g.id);
            const Functor& Tgf = cl.transport.at(gf);
            std::map<std::string, std::string> comps;
            if (cartesian_direction) {
                // gamma_{g,f} : f^• ∘ g^• => (g∘f)^• over objects of fiber(dst g)
                for (auto& ob : cl.fiber.at(g.dst).objects()) {
                    const std::string lg = lift_of(g.id, ob);
                    const std::string lf = lift_of(f.id, Tg.ob(ob));
                    const std::string lgf = lift_of(gf, ob);
                    comps[ob] = solve(Tf.ob(Tg.ob(ob)), Tgf.ob(ob), f.src,
                                      [&](const std::string& u) {
                                          return E.compose(lgf, u) == E.compose(lg, lf);
                                      });
                }
                cl.coherence.emplace(key(g.id, f.id),
                                     NatTrans::make(Tf.after(Tg), Tgf, comps));
            } else {
                // gamma_{g,f} : g_• ∘ f_• => (g∘f)_• over objects of fiber(src f)
                for (auto& ob : cl.fiber.at(f.src).objects()) {
                    const std::string lf = lift_of(f.id, ob);
                    const std::string lg = lift_of(g.id, Tf.ob(ob));
                    const std::string lgf = lift_of(gf, ob);
                    comps[ob] = solve(Tg.ob(Tf.ob(ob)), Tgf.ob(ob), g.dst,
                                      [&](const std::string& u) {
                                          return E.compose(u, E.compose(lg, lf)) == lgf;
                                      });
                }
                cl.coherence.emplace(key(g.id, f.id),
                                     NatTrans::make(Tg.after(Tf), Tgf, comps));
            }
        }

    // Cocycle: for h∘g∘f both factorizations of the coherence agree.
    for (const Mor& f : B.morphisms())
        for (const Mor& g : B.morphisms()) {
            if (f.dst != g.src) continue;
            for (const Mor& h : B.morphisms()) {
                if (g.dst != h.src) continue;
                const std::string gf = B.compose(g.id, f.id);
                const std::string hg = B.compose(h.id, g.id);
                if (cartesian_direction) {
                    const Functor& Tf = cl.transport.at(f.id);
                    for (auto& ob : cl.fiber.at(h.dst).objects()) {
                        // route 1: f^• g^• h^• -> f^•(gamma_{h,g}) -> f^• (hg)^• -> gamma_{hg,f}
                        const std::string r1 = E.compose(
                            cl.coherence.at(key(hg, f.id)).at(ob),
                            Tf.mor(cl.coherence.at(key(h.id, g.id)).at(ob)));
                        // route 2: gamma_{g,f} at h^•ob, then gamma_{h,gf}
                        const std::string r2 = E.compose(
                            cl.coherence.at(key(h.id, gf)).at(ob),
                            cl.coherence.at(key(g.id, f.id))
                                .at(cl.transport.at(h.id).ob(ob)));
                        if (r1 != r2) cl.cocycle_ok = false;
                    }
                } else {
                    const Functor& Th = cl.transport.at(h.id);
                    for (auto& ob : cl.fiber.at(f.src).objects()) {
                        const std::string r1 = E.compose(
                            cl.coherence.at(key(h.id, gf)).at(ob),
                            Th.mor(cl.coherence.at(key(g.id, f.id)).at(ob)));
                        const std::string r2 = E.compose(
                            cl.coherence.at(key(hg, f.id)).at(ob),
                            cl.coherence.at(key(h.id, g.id))
                                .at(cl.transport.at(f.id).ob(ob)));
                        if (r1 != r2) cl.cocycle_ok = false;
                    }
                }
            }
        }
    return cl;
}

// ---------------------------------------------------------------------------
// Exhaustive adjoint search

struct Adjunction {
    Functor right;   ///< right adjoint G of the searched F
    NatTrans unit;   ///< id => G∘F
    NatTrans counit; ///< F∘G => id
};

enum class SearchOutcome { Found, Absent, CapExceeded };

struct AdjointResult {
    SearchOutcome outcome = SearchOutcome::Absent;
    std::optional<Adjunction> adjunction;
};

namespace detail {

/// Enumerate all functors dom -> cod in a deterministic order; `visit`
/// returns true to stop. Returns false iff the candidate budget ran out.
inline bool enumerate_functors(const FinCat& dom, const FinCat& cod,
                               const std::function<bool(const Functor&)>& visit,
                               size_t& budget) {
    const auto& obs = dom.objects();
    std::vector<std::string> nonid;
    for (const Mor& m : dom.morphisms())
        if (!dom.is_identity(m.id)) nonid.push_back(m.id);

    std::vector<size_t> ob_choice(obs.size(), 0);
    const size_t nco = cod.objects().size();
    if (nco == 0) return true;
    bool stop = false;
    std::function<void(size_t, std::map<std::string, std::string>&)> rec_obj =
        [&](size_t k, std::map<std::string, std::string>& oo) {
            if (stop || budget == 0) return;
            if (k == obs.size()) {
                // assign morphisms by DFS with incremental composition checks
                std::map<std::string, std::string> om;
                for (auto& o : obs) om[dom.identity_of(o)] = cod.identity_of(oo[o]);
                std::function<void(size_t)> rec_mor = [&](size_t j) {
                    if (stop || budget == 0) return;
                    if (j == nonid.size()) {
                        if (budget) --budget;
                        Functor f = Functor::make(dom, cod, oo, om);
                        if (visit(f)) stop = true;
                        return;
                    }
                    const Mor& m = dom.mor(nonid[j]);
                    for (auto& cand : cod.hom(oo[m.src], oo[m.dst])) {
                        om[m.id] = cand;
                        bool ok = true;
                        // check all composition constraints among assigned morphisms
                        for (const Mor& f1 : dom.morphisms()) {
                            if (!om.count(f1.id)) continue;
                            for (const Mor& f2 : dom.morphisms()) {
                                if (!om.count(f2.id) || f1.dst != f2.src) continue;
                                const std::string& c = dom.compose(f2.id, f1.id);
                                if (!om.count(c)) continue;
                                if (cod.compose(om[f2.id], om[f1.id]) != om[c]) { ok = false; break; }
                            }
                            if (!ok) break;
                        }
                        if (ok) rec_mor(j + 1);
                        om.erase(m.id);
                        if (stop || budget == 0) return;
                    }
                };
                rec_mor(0);
                return;
            }
            for (auto& c : cod.objects()) {
                oo[obs[k]] = c;
                rec_obj(k + 1, oo);
                if (stop || budget == 0) { oo.erase(obs[k]); return; }
                oo.erase(obs[k]);
            }
        };
    std::map<std::string, std::string> oo;
    rec_obj(0, oo);
    return stop || budget > 0;
}

} // namespace detail

/// Exhaustive search for a right adjoint of F with verified triangle
/// identities. Exceeding the candidate budget is a distinct outcome.
inline AdjointResult find_adjoint(const Functor& F, size_t cap = 1000000) {
    const FinCat& C = F.dom();
    const FinCat& D = F.cod();
    AdjointResult res;
    size_t budget = cap;

    auto try_G = [&](const Functor& G) -> bool {
        // unit components eta_c in Hom_C(c, G(F(c)))
        const auto& cobs = C.objects();
        std::vector<std::vector<std::string>> unit_cands;
        for (auto& c : cobs) {
            unit_cands.push_back(C.hom(c, G.ob(F.ob(c))));
            if (unit_cands.back().empty()) return false;
        }
        std::map<std::string, std::string> eta;
        std::function<bool(size_t)> rec_eta = [&](size_t k) -> bool {
            if (k == cobs.size()) {
                NatTrans unit;
                try {
                    unit = NatTrans::make(Functor::identity(C), G.after(F), eta);
                } catch (const Error&) {
                    return false;
                }
                // counit components eps_d in Hom_D(F(G(d)), d)
                const auto& dobs = D.objects();
                std::map<std::string, std::string> eps;
                std::function<bool(size_t)> rec_eps = [&](size_t j) -> bool {
                    if (j == dobs.size()) {
                        NatTrans counit;
                        try {
                            counit = NatTrans::make(F.after(G), Functor::identity(D), eps);
                        } catch (const Error&) {
                            return false;
                        }
                        for (auto& c : C.objects())
                            if (D.compose(eps.at(F.ob(c)), F.mor(eta.at(c))) !=
                                D.identity_of(F.ob(c)))
                                return false;
                        for (auto& d : D.objects())
                            if (C.compose(G.mor(eps.at(d)), eta.at(G.ob(d))) !=
                                C.identity_of(G.ob(d)))
                                return false;
                        res.outcome = SearchOutcome::Found;
                        res.adjunction = Adjunction{G, unit, counit};
                        return true;
                    }
                    for (auto& cand : D.hom(F.ob(G.ob(dobs[j])), dobs[j])) {
                        eps[dobs[j]] = cand;
                        if (rec_eps(j + 1)) return true;
                        eps.erase(dobs[j]);
                    }
                    return false;
                };
                return rec_eps(0);
            }
            for (auto& cand : unit_cands[k]) {
                eta[cobs[k]] = cand;
                if (rec_eta(k + 1)) return true;
                eta.erase(cobs[k]);
            }
            return false;
        };
        return rec_eta(0);
    };

    bool completed = detail::enumerate_functors(D, C, try_G, budget);
    if (res.outcome == SearchOutcome::Found) return res;
    res.outcome = completed ? SearchOutcome::Absent : SearchOutcome::CapExceeded;
    return res;
}

} // namespace catkit::fincat
