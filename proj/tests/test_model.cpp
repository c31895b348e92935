#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "pt/model.hpp"

using namespace pt;

TEST_CASE("labels") {
    CHECK(valid_label("SE001"));
    CHECK(valid_label("fam1_g2"));
    CHECK_FALSE(valid_label(""));
    CHECK_FALSE(valid_label("a b"));
    CHECK_FALSE(valid_label("a(b"));
    CHECK_FALSE(valid_label("a:1"));
}

TEST_CASE("newick parse basic") {
    RootedTree t = newick_parse("((a,b),c);");
    CHECK(t.size() == 5);
    CHECK(t.inner_vertices().size() == 2);
    CHECK(t.leaf_labels() == std::vector<std::string>{"a", "b", "c"});
    CHECK(newick_write(t) == "((a,b),c);");
}

TEST_CASE("newick parse errors carry offsets") {
    CHECK_THROWS_AS(newick_parse("((a,b),c"), ParseError);
    CHECK_THROWS_AS(newick_parse("((a,a),b);"), ParseError);
    CHECK_THROWS_AS(newick_parse("((,b),c);"), ParseError);
    CHECK_THROWS_AS(newick_parse("(a);"), ParseError);
    try {
        newick_parse("((a,b),c));");
    } catch (const ParseError& e) {
        CHECK(e.offset() > 0);
    }
}

TEST_CASE("newick ternary 15 species") {
    RootedTree t = newick_parse(
        "(((SE001,SE002,SE003),SE004,SE005),(SE006,(SE007,SE008,SE009),SE010),"
        "(SE011,SE012,(SE013,SE014,SE015)));");
    CHECK(t.leaf_labels().size() == 15);
    auto inner = t.inner_vertices();
    CHECK(inner.size() == 7);
    for (int v : inner) CHECK(t.node(v).children.size() == 3);
}

TEST_CASE("newick accepts and ignores branch lengths") {
    RootedTree t = newick_parse("((a:0.5,b:1):2,c:0.1);");
    CHECK(newick_write(t) == "((a,b),c);");
}

TEST_CASE("newick event labels") {
    RootedTree t = newick_parse("((a,b)D,c)S;");
    CHECK(t.node(t.root()).event == static_cast<int>(Event::Speciation));
    CHECK(newick_write(t, LabelMode::Event) == "((a,b)D,c)S;");
}

TEST_CASE("newick round trip random trees") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        size_t n = 2 + pth::rnd_below(rng, 9);
        RootedTree t = pth::random_tree(rng, pth::letters(n), 0.3);
        std::string s = newick_write(t);
        CHECK(newick_write(newick_parse(s)) == s);
    }
}

TEST_CASE("displayed triples") {
    RootedTree caterpillar = newick_parse("((a,b),c);");
    TripleSet r = displayed_triples(caterpillar);
    CHECK(r.size() == 1);
    CHECK(r.contains(Triple::of("a", "b", "c")));

    TripleSet star = displayed_triples(newick_parse("(a,b,c);"));
    CHECK(star.empty());
}

TEST_CASE("displayed triples of binary tree cover all trios") {
    std::mt19937_64 rng(11);
    RootedTree t = pth::random_tree(rng, pth::letters(5), 0.0);
    TripleSet r = displayed_triples(t);
    CHECK(r.size() == 10);  // C(5,3), one orientation per trio
    // lca oracle: (ab|z) displayed iff lca(a,b) is a strict descendant of lca(a,b,z)
    for (const auto& [tr, w] : r.entries()) {
        int ab = t.lca_leaves({tr.a, tr.b});
        int abz = t.lca_leaves({tr.a, tr.b, tr.z});
        CHECK(ab != abz);
        CHECK(w == 1.0);
    }
}

TEST_CASE("hierarchy of tree") {
    Hierarchy h = hierarchy_of(newick_parse("((a,b),c);"));
    std::set<std::set<std::string>> want = {
        {"a"}, {"b"}, {"c"}, {"a", "b"}, {"a", "b", "c"}};
    CHECK(h.clusters() == want);

    std::mt19937_64 rng(3);
    RootedTree bin5 = pth::random_tree(rng, pth::letters(5), 0.0);
    CHECK(hierarchy_of(bin5).clusters().size() == 9);  // 2n-1 for binary

    CHECK(hierarchy_of(newick_parse("(a,b,c,d);")).clusters().size() == 5);
}

TEST_CASE("tree from hierarchy") {
    Hierarchy h({"a", "b", "c"});
    h.insert({"a", "b"});
    CHECK(newick_write(tree_from_hierarchy(h)) == "((a,b),c);");

    Hierarchy star({"a", "b", "c", "d"});
    CHECK(newick_write(tree_from_hierarchy(star)) == "(a,b,c,d);");

    Hierarchy bad({"a", "b", "c"});
    bad.insert({"a", "b"});
    bad.insert({"b", "c"});
    CHECK(bad.incompatible_pair().has_value());
    CHECK_THROWS(tree_from_hierarchy(bad));
}

TEST_CASE("hierarchy round trip on random trees") {
    std::mt19937_64 rng(19);
    for (int i = 0; i < 200; ++i) {
        size_t n = 2 + pth::rnd_below(rng, 9);
        RootedTree t = pth::random_tree(rng, pth::letters(n), 0.4);
        RootedTree back = tree_from_hierarchy(hierarchy_of(t));
        CHECK(same_tree(t, back));
        size_t k = hierarchy_of(t).clusters().size();
        CHECK(k <= 2 * n - 1);
    }
}

TEST_CASE("lca") {
    RootedTree t = newick_parse("((a,b),c);");
    int ab = t.lca_leaves({"a", "b"});
    CHECK(t.node(ab).parent == t.root());
    CHECK(t.lca_leaves({"a", "c"}) == t.root());
    int a = t.leaf_by_label("a");
    CHECK(t.lca_leaves({"a"}) == a);
    CHECK_THROWS(t.lca_leaves({"a", "nope"}));
}

TEST_CASE("triple normalization") {
    Triple t1 = Triple::of("b", "a", "c");
    Triple t2 = Triple::of("a", "b", "c");
    CHECK(t1 == t2);
    TripleSet s;
    s.add(t1, 2.0);
    s.add(t2, 1.0);
    CHECK(s.size() == 1);
    CHECK(s.weight(t2) == 3.0);
    CHECK(s.total_weight() == 3.0);
    CHECK(s.weight(Triple::of("a", "c", "b")) == 0.0);
}

TEST_CASE("species map") {
    SpeciesMap sm;
    sm.gene_to_species = {{"g1", "A"}, {"g2", "B"}};
    CHECK(sm.at("g1") == "A");
    CHECK_THROWS(sm.at("gx"));
    CHECK(sm.species() == std::set<SpeciesId>{"A", "B"});
}
