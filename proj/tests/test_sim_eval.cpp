#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "pt/sim_eval.hpp"
#include "pt/triples.hpp"

using namespace pt;

namespace {

SimConfig small_cfg(uint64_t seed, size_t families = 20) {
    SimConfig cfg;
    cfg.n_species = 5;
    cfg.n_families = families;
    cfg.seed = seed;
    return cfg;
}

bool same_estimate(const OrthologyEstimate& a, const OrthologyEstimate& b) {
    return a.genes == b.genes && a.theta == b.theta &&
           a.sigma.gene_to_species == b.sigma.gene_to_species;
}

// trio-by-trio orientation comparison straight from the lca definition
double tt_oracle(const RootedTree& t1, const RootedTree& t2) {
    auto names = t1.leaf_labels();
    size_t n = names.size(), cnt = 0;
    auto orient = [](const RootedTree& t, const std::string& x, const std::string& y,
                     const std::string& z) {
        int a = t.leaf_by_label(x), b = t.leaf_by_label(y), c = t.leaf_by_label(z);
        int ab = t.lca(a, b), ac = t.lca(a, c), bc = t.lca(b, c);
        if (ac == bc && ab != ac) return 0;  // (xy|z)
        if (ab == bc && ac != ab) return 1;  // (xz|y)
        if (ab == ac && bc != ab) return 2;  // (yz|x)
        return 3;                            // unresolved
    };
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            for (size_t k = j + 1; k < n; ++k)
                if (orient(t1, names[i], names[j], names[k]) !=
                    orient(t2, names[i], names[j], names[k]))
                    ++cnt;
    return static_cast<double>(cnt);
}

double rf_oracle(const RootedTree& t1, const RootedTree& t2) {
    auto c1 = hierarchy_of(t1).clusters();
    auto c2 = hierarchy_of(t2).clusters();
    size_t d = 0;
    for (const auto& c : c1) d += c2.count(c) == 0;
    for (const auto& c : c2) d += c1.count(c) == 0;
    return static_cast<double>(d) / 2.0;
}

// minimum matching cost by trying every permutation (padded square)
double mc_oracle(const RootedTree& t1, const RootedTree& t2) {
    auto grab = [](const RootedTree& t) {
        std::vector<std::set<std::string>> out;
        for (int v : t.inner_vertices())
            if (v != t.root()) out.push_back(t.leaf_set(v));
        return out;
    };
    auto c1 = grab(t1), c2 = grab(t2);
    size_t m = std::max(c1.size(), c2.size());
    if (m == 0) return 0.0;
    std::vector<size_t> perm(m);
    for (size_t i = 0; i < m; ++i) perm[i] = i;
    double best = 1e18;
    do {
        double cost = 0;
        for (size_t i = 0; i < m; ++i) {
            size_t j = perm[i];
            if (i < c1.size() && j < c2.size()) {
                std::vector<std::string> d;
                std::set_symmetric_difference(c1[i].begin(), c1[i].end(),
                                              c2[j].begin(), c2[j].end(),
                                              std::back_inserter(d));
                cost += static_cast<double>(d.size());
            } else if (i < c1.size()) {
                cost += static_cast<double>(c1[i].size());
            } else if (j < c2.size()) {
                cost += static_cast<double>(c2[j].size());
            }
        }
        best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST_CASE("simulation is deterministic under the seed") {
    SimResult a = simulate(small_cfg(7));
    SimResult b = simulate(small_cfg(7));
    SimResult c = simulate(small_cfg(8));
    CHECK(same_tree(a.species_tree, b.species_tree));
    CHECK(same_estimate(a.orthology, b.orthology));
    REQUIRE(a.gene_trees.size() == b.gene_trees.size());
    for (size_t i = 0; i < a.gene_trees.size(); ++i)
        CHECK(same_tree(a.gene_trees[i], b.gene_trees[i]));
    CHECK_FALSE(same_estimate(a.orthology, c.orthology));
}

TEST_CASE("zero duplication rate gives cliques and no triples") {
    SimConfig cfg = small_cfg(11);
    cfg.dup_rate = 0.0;
    cfg.loss_rate = 0.3;
    SimResult r = simulate(cfg);
    for (const auto& gt : r.gene_trees) {
        auto genes = gt.leaf_labels();
        for (size_t i = 0; i < genes.size(); ++i)
            for (size_t j = i + 1; j < genes.size(); ++j) {
                bool cross = r.orthology.sigma.at(genes[i]) !=
                             r.orthology.sigma.at(genes[j]);
                CHECK(r.orthology.weight(genes[i], genes[j]) == (cross ? 1.0 : 0.0));
            }
    }
    // the cotree of a clique is flat, so nothing can be read off it
    for (const auto& comp : connected_components(r.orthology)) {
        RootedTree ct = cotree(comp.genes, comp.estimated_edges());
        SpeciesMap sigma;
        for (const auto& [g, s] : comp.species) sigma.gene_to_species[g] = s;
        CHECK(extract_species_triples(ct, sigma).empty());
    }
}

TEST_CASE("root duplication with zero loss gives two full paralog groups") {
    SimConfig cfg = small_cfg(13, 60);
    cfg.loss_rate = 0.0;
    cfg.loss_increment = 0.0;
    SimResult r = simulate(cfg);
    std::set<std::string> all_species = r.orthology.sigma.species();
    int seen = 0;
    for (const auto& gt : r.gene_trees) {
        int root = gt.root();
        if (gt.node(root).event != static_cast<int>(Event::Duplication)) continue;
        ++seen;
        for (int c : gt.node(root).children) {
            std::set<std::string> sp;
            for (const auto& g : gt.leaf_set(c)) sp.insert(r.orthology.sigma.at(g));
            CHECK(sp == all_species);  // no loss: every copy reaches every species
        }
        const auto& kids = gt.node(root).children;
        for (size_t i = 0; i < kids.size(); ++i)
            for (size_t j = i + 1; j < kids.size(); ++j)
                for (const auto& x : gt.leaf_set(kids[i]))
                    for (const auto& y : gt.leaf_set(kids[j]))
                        CHECK(r.orthology.weight(x, y) == 0.0);
    }
    CHECK(seen > 0);
}

TEST_CASE("extinction-prone settings raise") {
    SimConfig cfg = small_cfg(17);
    cfg.dup_rate = 0.0;
    cfg.loss_rate = 50.0;
    CHECK_THROWS_AS(simulate(cfg), std::runtime_error);
    SimConfig tiny = small_cfg(1);
    tiny.n_species = 2;
    CHECK_THROWS_AS(simulate(tiny), std::invalid_argument);
}

TEST_CASE("simulated orthology is a cograph and its triples are sound") {
    SimResult r = simulate(small_cfg(19, 30));
    TripleSet truth = displayed_triples(r.species_tree);
    for (const auto& comp : connected_components(r.orthology)) {
        auto edges = comp.estimated_edges();
        CHECK_FALSE(find_p4(comp.genes, edges).has_value());
        RootedTree ct = cotree(comp.genes, edges);
        SpeciesMap sigma;
        for (const auto& [g, s] : comp.species) sigma.gene_to_species[g] = s;
        TripleSet got = extract_species_triples(ct, sigma);
        for (const auto& [t, w] : got.entries()) CHECK(truth.contains(t));
    }
}

TEST_CASE("noise models, edge cases") {
    SimResult r = simulate(small_cfg(23));
    const OrthologyEstimate& g = r.orthology;
    for (NoiseModel m : {NoiseModel::Homologous, NoiseModel::Orthologous,
                         NoiseModel::Paralogous, NoiseModel::Xenologous})
        CHECK(same_estimate(add_noise(g, {m, 0.0, 5}), g));

    OrthologyEstimate wiped = add_noise(g, {NoiseModel::Paralogous, 1.0, 5});
    for (const auto& [p, w] : wiped.theta) CHECK(w < kOrthologyThreshold);

    // insertions stay inside the gene family the pair belongs to
    OrthologyEstimate full = add_noise(g, {NoiseModel::Orthologous, 1.0, 5});
    std::vector<GeneId> genes(g.genes.begin(), g.genes.end());
    std::map<GeneId, size_t> fam;
    {
        auto comps = connected_components(g);
        for (size_t c = 0; c < comps.size(); ++c)
            for (const auto& gene : comps[c].genes) fam[gene] = c;
    }
    for (size_t i = 0; i < genes.size(); ++i)
        for (size_t j = i + 1; j < genes.size(); ++j) {
            bool cross = g.sigma.at(genes[i]) != g.sigma.at(genes[j]);
            bool want = cross && fam[genes[i]] == fam[genes[j]];
            CHECK((full.weight(genes[i], genes[j]) >= kOrthologyThreshold) == want);
        }

    // i and ii never touch same-species pairs
    OrthologyEstimate flip = add_noise(g, {NoiseModel::Homologous, 1.0, 5});
    for (size_t i = 0; i < genes.size(); ++i)
        for (size_t j = i + 1; j < genes.size(); ++j)
            if (g.sigma.at(genes[i]) == g.sigma.at(genes[j]))
                CHECK(flip.weight(genes[i], genes[j]) == 0.0);

    CHECK_THROWS_AS(add_noise(g, {NoiseModel::Homologous, 1.5, 5}),
                    std::invalid_argument);
}

TEST_CASE("species reassignment keeps the edges") {
    SimResult r = simulate(small_cfg(29));
    OrthologyEstimate moved = add_noise(r.orthology, {NoiseModel::Xenologous, 0.5, 5});
    CHECK(moved.theta == r.orthology.theta);
    CHECK(moved.genes == r.orthology.genes);
    size_t changed = 0;
    for (const auto& gene : r.orthology.genes) {
        CHECK(moved.sigma.contains(gene));
        if (moved.sigma.at(gene) != r.orthology.sigma.at(gene)) ++changed;
    }
    CHECK(changed > 0);
}

TEST_CASE("noise is deterministic under the seed") {
    SimResult r = simulate(small_cfg(31));
    NoiseSpec spec{NoiseModel::Homologous, 0.3, 77};
    CHECK(same_estimate(add_noise(r.orthology, spec), add_noise(r.orthology, spec)));
}

TEST_CASE("distance basics") {
    RootedTree t = newick_parse("((a,b),(c,(d,e)));");
    Distances self = tree_distance(t, t);
    CHECK(self.mc == 0.0);
    CHECK(self.rf == 0.0);
    CHECK(self.ns == 0.0);
    CHECK(self.tt == 0.0);

    Distances d1 = tree_distance(newick_parse("(a,b,c);"), newick_parse("((a,b),c);"));
    CHECK(d1.tt == 1.0);
    CHECK(d1.ns == doctest::Approx(std::sqrt(2.0)));

    Distances d2 = tree_distance(newick_parse("((a,b),c,d);"),
                                 newick_parse("((a,b),(c,d));"));
    CHECK(d2.rf == 0.5);
    CHECK(d2.mc == 2.0);  // {a,b} matches, {c,d} pays its size

    CHECK_THROWS_WITH_AS(tree_distance(newick_parse("(a,b,c);"),
                                       newick_parse("(a,b,x);")),
                         doctest::Contains("leaf sets differ"), std::runtime_error);
}

TEST_CASE("metrics agree with brute-force oracles") {
    std::mt19937_64 rng(67);
    for (int i = 0; i < 100; ++i) {
        size_t n = 4 + pth::rnd_below(rng, 3);  // 4..6 leaves
        RootedTree a = pth::random_tree(rng, pth::letters(n), 0.3);
        RootedTree b = pth::random_tree(rng, pth::letters(n), 0.3);
        Distances d = tree_distance(a, b);
        Distances r = tree_distance(b, a);
        CHECK(d.mc == r.mc);
        CHECK(d.rf == r.rf);
        CHECK(d.ns == doctest::Approx(r.ns));
        CHECK(d.tt == r.tt);
        CHECK(d.mc >= 0.0);
        CHECK(d.tt == tt_oracle(a, b));
        CHECK(d.rf == rf_oracle(a, b));
        CHECK(d.mc == mc_oracle(a, b));
    }
}

TEST_CASE("yule normalization") {
    Distances c1 = yule_normalizer(8, 200, 3);
    Distances c2 = yule_normalizer(8, 200, 3);
    CHECK(c1.tt == c2.tt);
    CHECK(c1.mc == c2.mc);
    CHECK(c1.tt > 0.0);

    RootedTree t = newick_parse("(((a,b),c),((d,e),(f,(g,h))));");
    DistanceReport self = compare_trees(t, t, 200, 3);
    CHECK(self.normalized.tt == 0.0);
    CHECK(self.normalized.mc == 0.0);

    // fresh pairs should normalize to roughly 1
    std::mt19937_64 rng(71);
    std::vector<std::string> names;
    for (int i = 0; i < 8; ++i) names.push_back("x" + std::to_string(i));
    Distances acc;
    const int pairs = 200;
    for (int i = 0; i < pairs; ++i) {
        RootedTree a = random_yule_tree(rng, names);
        RootedTree b = random_yule_tree(rng, names);
        Distances d = tree_distance(a, b);
        acc.mc += d.mc / c1.mc;
        acc.rf += d.rf / c1.rf;
        acc.ns += d.ns / c1.ns;
        acc.tt += d.tt / c1.tt;
    }
    for (double v : {acc.mc, acc.rf, acc.ns, acc.tt})
        CHECK(std::abs(v / pairs - 1.0) < 0.1);

    CHECK_THROWS_AS(yule_normalizer(3, 10, 1), std::invalid_argument);
}

TEST_CASE("majority consensus") {
    RootedTree t = newick_parse("((a,b),c);");
    CHECK(same_tree(majority_consensus({t, t, t}), t));

    std::vector<RootedTree> spin = {newick_parse("((a,b),c);"),
                                    newick_parse("((a,c),b);"),
                                    newick_parse("((b,c),a);")};
    CHECK(newick_write(majority_consensus(spin)) == "(a,b,c);");

    std::vector<RootedTree> lean = {newick_parse("((a,b),c);"),
                                    newick_parse("((a,b),c);"),
                                    newick_parse("(a,b,c);")};
    CHECK(newick_write(majority_consensus(lean)) == "((a,b),c);");

    CHECK_THROWS_AS(majority_consensus({t, newick_parse("(a,b,x);")}),
                    std::runtime_error);
    CHECK_THROWS_AS(majority_consensus({}), std::invalid_argument);
}
