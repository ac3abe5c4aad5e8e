#include <catch2/catch_amalgamated.hpp>

#include "catkit/setval.hpp"

using namespace catkit;
using namespace catkit::setval;
using catkit::fincat::FinCat;
using catkit::fincat::Functor;

namespace {

SetFunctor arrow_diagram(const FinSet& a, const FinSet& b,
                         const std::map<std::string, std::string>& f) {
    FinCat d1 = fincat::delta(1);
    return SetFunctor(d1, {{"0", a}, {"1", b}},
                      {{"0->0", FinMap::identity(a)},
                       {"1->1", FinMap::identity(b)},
                       {"0->1", FinMap(a, b, f)}});
}

// Walking parallel pair · => ·
FinCat parallel_pair() {
    std::vector<fincat::Mor> ms = {
        {"id_a", "a", "a"}, {"id_b", "b", "b"}, {"f", "a", "b"}, {"g", "a", "b"}};
    std::map<std::string, std::string> ids{{"a", "id_a"}, {"b", "id_b"}};
    std::vector<std::array<std::string, 3>> comp{
        {"id_a", "id_a", "id_a"}, {"id_b", "id_b", "id_b"}, {"f", "id_a", "f"},
        {"id_b", "f", "f"},       {"g", "id_a", "g"},       {"id_b", "g", "g"}};
    return FinCat::make({"a", "b"}, ms, ids, comp);
}

// Cospan a -> c <- b
FinCat cospan() {
    std::vector<fincat::Mor> ms = {{"id_a", "a", "a"}, {"id_b", "b", "b"}, {"id_c", "c", "c"},
                                   {"f", "a", "c"},    {"g", "b", "c"}};
    std::map<std::string, std::string> ids{{"a", "id_a"}, {"b", "id_b"}, {"c", "id_c"}};
    std::vector<std::array<std::string, 3>> comp{
        {"id_a", "id_a", "id_a"}, {"id_b", "id_b", "id_b"}, {"id_c", "id_c", "id_c"},
        {"f", "id_a", "f"},       {"id_c", "f", "f"},       {"g", "id_b", "g"},
        {"id_c", "g", "g"}};
    return FinCat::make({"a", "b", "c"}, ms, ids, comp);
}

} // namespace

TEST_CASE("limit over delta1 is the initial value") {
    FinSet a = FinSet::canonical(3, "x");
    FinSet b = FinSet::canonical(2, "y");
    SetFunctor d = arrow_diagram(a, b, {{"x0", "y0"}, {"x1", "y0"}, {"x2", "y1"}});
    LimitResult l = limit(d);
    REQUIRE(l.apex.size() == a.size());
    REQUIRE(l.projections.at("0").surjective());
}

TEST_CASE("pullback of {1,2} -> {*} <- {1,2,3} has 6 elements") {
    FinCat sh = cospan();
    FinSet A = FinSet::canonical(2, "a");
    FinSet B = FinSet::canonical(3, "b");
    FinSet C = FinSet::canonical(1, "c");
    SetFunctor d(sh, {{"a", A}, {"b", B}, {"c", C}},
                 {{"id_a", FinMap::identity(A)},
                  {"id_b", FinMap::identity(B)},
                  {"id_c", FinMap::identity(C)},
                  {"f", FinMap(A, C, {{"a0", "c0"}, {"a1", "c0"}})},
                  {"g", FinMap(B, C, {{"b0", "c0"}, {"b1", "c0"}, {"b2", "c0"}})}});
    REQUIRE(limit(d).apex.size() == 6);
}

TEST_CASE("equalizer of two maps agreeing at exactly one element") {
    FinCat sh = parallel_pair();
    FinSet A = FinSet::canonical(3, "x");
    FinSet B = FinSet::canonical(2, "y");
    SetFunctor d(sh, {{"a", A}, {"b", B}},
                 {{"id_a", FinMap::identity(A)},
                  {"id_b", FinMap::identity(B)},
                  {"f", FinMap(A, B, {{"x0", "y0"}, {"x1", "y0"}, {"x2", "y1"}})},
                  {"g", FinMap(A, B, {{"x0", "y1"}, {"x1", "y0"}, {"x2", "y0"}})}});
    REQUIRE(limit(d).apex.size() == 1);
}

TEST_CASE("colimit of a discrete diagram is the disjoint union") {
    FinCat sh = fincat::discrete({"u", "v"});
    SetFunctor d(sh, {{"u", FinSet::canonical(2, "a")}, {"v", FinSet::canonical(3, "b")}},
                 {{"id_u", FinMap::identity(FinSet::canonical(2, "a"))},
                  {"id_v", FinMap::identity(FinSet::canonical(3, "b"))}});
    REQUIRE(colimit(d).apex.size() == 5);
}

TEST_CASE("coequalizer glues 1~2~3 to a single class") {
    FinCat sh = parallel_pair();
    FinSet A(std::vector<std::string>{"a", "b"});
    FinSet B(std::vector<std::string>{"1", "2", "3"});
    SetFunctor d(sh, {{"a", A}, {"b", B}},
                 {{"id_a", FinMap::identity(A)},
                  {"id_b", FinMap::identity(B)},
                  {"f", FinMap(A, B, {{"a", "1"}, {"b", "2"}})},
                  {"g", FinMap(A, B, {{"a", "2"}, {"b", "3"}})}});
    ColimitResult c = colimit(d);
    REQUIRE(c.apex.size() == 1);
}

TEST_CASE("colimit over a shape with a final object is the final value") {
    FinSet a = FinSet::canonical(3, "x");
    FinSet b = FinSet::canonical(2, "y");
    SetFunctor d = arrow_diagram(a, b, {{"x0", "y0"}, {"x1", "y0"}, {"x2", "y1"}});
    ColimitResult c = colimit(d);
    REQUIRE(c.apex.size() == b.size());
    REQUIRE(c.injections.at("1").bijective());
}

TEST_CASE("grothendieck of the constant singleton is the shape") {
    FinCat sh = fincat::delta(2);
    SetFunctor d = SetFunctor::constant(sh, FinSet::canonical(1, "pt"));
    GrothendieckResult g = grothendieck(d);
    REQUIRE(g.total.objects().size() == sh.objects().size());
    REQUIRE(g.total.morphisms().size() == sh.morphisms().size());
}

TEST_CASE("grothendieck of a 2,1-diagram over delta1: 3 objects, 2 non-identity arrows") {
    FinSet a = FinSet::canonical(2, "a");
    FinSet b = FinSet::canonical(1, "c");
    SetFunctor d = arrow_diagram(a, b, {{"a0", "c0"}, {"a1", "c0"}});
    GrothendieckResult g = grothendieck(d);
    REQUIRE(g.total.objects().size() == 3);
    size_t nonid = 0;
    for (auto& m : g.total.morphisms())
        if (!g.total.is_identity(m.id)) ++nonid;
    REQUIRE(nonid == 2);
    auto rep = fincat::check_fibration(g.projection);
    REQUIRE(rep.opfibration);
}

TEST_CASE("colimit classes agree with connected components of the grothendieck construction") {
    Rng rng(20260811);
    std::vector<FinCat> shapes = {fincat::delta(1), fincat::delta(2), parallel_pair(), cospan(),
                                  fincat::discrete({"p", "q"})};
    for (int t = 0; t < 50; ++t) {
        const FinCat& sh = shapes[t % shapes.size()];
        SetFunctor d = random_set_functor(sh, rng, 3);
        ColimitResult c = colimit(d);
        GrothendieckResult g = grothendieck(d);
        // connected components of the total category via union-find on objects
        UnionFind uf;
        for (auto& o : g.total.objects()) uf.add(o);
        for (auto& m : g.total.morphisms()) uf.unite(m.src, m.dst);
        REQUIRE(uf.classes().size() == c.apex.size());
    }
}

TEST_CASE("limit/colimit universal properties on small instances") {
    Rng rng(42);
    std::vector<FinCat> shapes = {fincat::delta(1), parallel_pair(), cospan()};
    for (int t = 0; t < 12; ++t) {
        const FinCat& sh = shapes[t % shapes.size()];
        SetFunctor d = random_set_functor(sh, rng, 3, 1);
        LimitResult l = limit(d);
        // any competitor cone from a 2-element set factors uniquely
        FinSet probe = FinSet::canonical(2, "w");
        // enumerate cones: maps probe -> d.at(o) commuting with arrows
        std::vector<std::map<std::string, FinMap>> cones;
        std::vector<std::string> obs = sh.objects();
        std::map<std::string, FinMap> cur;
        std::function<void(size_t)> rec = [&](size_t k) {
            if (k == obs.size()) {
                for (auto& m : sh.morphisms())
                    if (!(d.arrow(m.id).after(cur.at(m.src)) == cur.at(m.dst))) return;
                cones.push_back(cur);
                return;
            }
            const FinSet& C = d.at(obs[k]);
            if (C.size() == 0) return; // no map from nonempty probe
            std::vector<size_t> idx(probe.size(), 0);
            while (true) {
                std::map<std::string, std::string> t;
                for (size_t i = 0; i < probe.size(); ++i)
                    t[probe.elements[i]] = C.elements[idx[i]];
                cur[obs[k]] = FinMap(probe, C, t);
                rec(k + 1);
                cur.erase(obs[k]);
                size_t j = 0;
                while (j < idx.size() && ++idx[j] == C.size()) idx[j++] = 0;
                if (j == idx.size()) break;
            }
        };
        rec(0);
        for (auto& cone : cones) {
            // unique mediating map probe -> apex
            size_t count = 0;
            if (l.apex.size() == 0) { REQUIRE(cones.empty()); break; }
            std::vector<size_t> idx(probe.size(), 0);
            while (true) {
                std::map<std::string, std::string> t;
                for (size_t i = 0; i < probe.size(); ++i)
                    t[probe.elements[i]] = l.apex.elements[idx[i]];
                FinMap med(probe, l.apex, t);
                bool ok = true;
                for (auto& o : obs)
                    if (!(l.projections.at(o).after(med) == cone.at(o))) { ok = false; break; }
                if (ok) ++count;
                size_t j = 0;
                while (j < idx.size() && ++idx[j] == l.apex.size()) idx[j++] = 0;
                if (j == idx.size()) break;
            }
            REQUIRE(count == 1);
        }
    }
}
