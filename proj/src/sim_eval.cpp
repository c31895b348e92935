#include "pt/sim_eval.hpp"

#include "pt/cograph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>

namespace pt {

namespace {

size_t below(std::mt19937_64& rng, size_t n) { return static_cast<size_t>(rng() % n); }

double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double exp_draw(std::mt19937_64& rng, double rate) {
    return -std::log1p(-unit(rng)) / rate;
}

}  // namespace

RootedTree random_yule_tree(std::mt19937_64& rng, const std::vector<std::string>& leaves) {
    if (leaves.empty()) throw std::invalid_argument("no leaves");
    RootedTree t;
    std::vector<int> active;
    for (const auto& l : leaves) active.push_back(t.add_leaf(l));
    while (active.size() > 1) {
        size_t i = below(rng, active.size());
        size_t j = below(rng, active.size() - 1);
        if (j >= i) ++j;
        if (i > j) std::swap(i, j);
        int merged = t.add_inner({active[i], active[j]});
        active[i] = merged;
        active.erase(active.begin() + static_cast<long>(j));
    }
    t.set_root(active[0]);
    t.canonicalize();
    return t;
}

namespace {

// One gene family evolving down the species tree. Unary vertices are
// collapsed on the fly, so a surviving lineage always comes back as a
// well-formed subtree index (or -1 when it went extinct).
class FamilySim {
  public:
    FamilySim(const RootedTree& species, const SimConfig& cfg, std::mt19937_64& rng,
              size_t family_index)
        : sp_(species), cfg_(cfg), rng_(rng), fam_(family_index) {}

    // The family enters through a unit-length stem edge above the species
    // root, so duplications can predate the first speciation. -1 when every
    // gene was lost.
    int run() { return traverse(sp_.root(), cfg_.loss_rate, 1.0); }

    RootedTree& tree() { return tree_; }
    const std::vector<std::pair<GeneId, SpeciesId>>& genes() const { return genes_; }

  private:
    // Lineage sitting at species vertex sv.
    int arrive(int sv, double loss_rate) {
        if (sp_.is_leaf(sv)) {
            GeneId g = "f" + std::to_string(fam_) + "g" + std::to_string(++counter_);
            genes_.emplace_back(g, sp_.node(sv).label);
            return tree_.add_leaf(g);
        }
        std::vector<int> kids;
        for (int c : sp_.node(sv).children) {
            int sub = traverse(c, loss_rate, 1.0);
            if (sub >= 0) kids.push_back(sub);
        }
        if (kids.empty()) return -1;
        if (kids.size() == 1) return kids[0];
        int v = tree_.add_inner(kids);
        tree_.node(v).event = static_cast<int>(Event::Speciation);
        return v;
    }

    // Lineage travelling along the edge into sv, t_remain of unit length left.
    int traverse(int sv, double loss_rate, double t_remain) {
        for (;;) {
            double total = cfg_.dup_rate + loss_rate;
            if (total <= 0.0) break;
            double dt = exp_draw(rng_, total);
            if (dt >= t_remain) break;
            t_remain -= dt;
            if (unit(rng_) * total < cfg_.dup_rate) {
                double lr = loss_rate + cfg_.loss_increment;
                int a = traverse(sv, lr, t_remain);
                int b = traverse(sv, lr, t_remain);
                if (a < 0) return b;
                if (b < 0) return a;
                int v = tree_.add_inner({a, b});
                tree_.node(v).event = static_cast<int>(Event::Duplication);
                return v;
            }
            return -1;  // loss
        }
        return arrive(sv, loss_rate);
    }

    const RootedTree& sp_;
    const SimConfig& cfg_;
    std::mt19937_64& rng_;
    size_t fam_;
    size_t counter_ = 0;
    RootedTree tree_;
    std::vector<std::pair<GeneId, SpeciesId>> genes_;
};

}  // namespace

SimResult simulate(const SimConfig& cfg) {
    if (cfg.dup_rate < 0 || cfg.loss_rate < 0 || cfg.loss_increment < 0)
        throw std::invalid_argument("negative rate");
    SimResult out;
    if (cfg.species_tree) {
        out.species_tree = *cfg.species_tree;
        out.species_tree.canonicalize();
    } else {
        if (cfg.n_species < 3) throw std::invalid_argument("need at least 3 species");
        size_t width = std::max<size_t>(2, std::to_string(cfg.n_species).size());
        std::vector<std::string> names;
        for (size_t i = 1; i <= cfg.n_species; ++i) {
            std::string num = std::to_string(i);
            names.push_back("s" + std::string(width - num.size(), '0') + num);
        }
        std::mt19937_64 rng(cfg.seed);
        out.species_tree = random_yule_tree(rng, names);
    }
    if (out.species_tree.leaf_labels().size() < 3)
        throw std::invalid_argument("need at least 3 species");

    std::mt19937_64 rng(cfg.seed + 1);
    size_t attempts = 0;
    while (out.gene_trees.size() < cfg.n_families) {
        if (++attempts > 10 * cfg.n_families)
            throw std::runtime_error("families keep going extinct; lower the loss rate");
        FamilySim fs(out.species_tree, cfg, rng, out.gene_trees.size() + 1);
        int root = fs.run();
        if (root < 0) continue;
        fs.tree().set_root(root);
        fs.tree().canonicalize();
        for (const auto& [g, s] : fs.genes()) {
            out.orthology.genes.insert(g);
            out.orthology.sigma.gene_to_species[g] = s;
        }
        const RootedTree& gt = fs.tree();
        std::vector<int> ls = gt.leaves();
        for (size_t i = 0; i < ls.size(); ++i)
            for (size_t j = i + 1; j < ls.size(); ++j) {
                int a = gt.lca(ls[i], ls[j]);
                if (gt.node(a).event == static_cast<int>(Event::Speciation))
                    out.orthology.set_weight(gt.node(ls[i]).label,
                                             gt.node(ls[j]).label, 1.0);
            }
        out.gene_trees.push_back(std::move(fs.tree()));
    }
    out.orthology.validate();
    return out;
}

OrthologyEstimate add_noise(const OrthologyEstimate& g, const NoiseSpec& spec) {
    if (spec.p < 0 || spec.p > 1) throw std::invalid_argument("p outside [0,1]");
    OrthologyEstimate out = g;
    std::mt19937_64 rng(spec.seed);
    std::vector<GeneId> genes(g.genes.begin(), g.genes.end());

    if (spec.model == NoiseModel::Xenologous) {
        std::vector<SpeciesId> all;
        for (const auto& s : g.sigma.species()) all.push_back(s);
        if (all.size() < 2) return out;
        for (const auto& gene : genes) {
            if (unit(rng) >= spec.p) continue;
            const SpeciesId& cur = out.sigma.at(gene);
            size_t k = below(rng, all.size() - 1);
            for (const auto& s : all) {
                if (s == cur) continue;
                if (k == 0) {
                    out.sigma.gene_to_species[gene] = s;
                    break;
                }
                --k;
            }
        }
        return out;
    }

    // insertions only make sense inside a gene family: edges across
    // families would weld the whole relation into one component
    std::map<GeneId, size_t> comp;
    {
        std::vector<Component> comps = connected_components(g);
        for (size_t c = 0; c < comps.size(); ++c)
            for (const auto& gene : comps[c].genes) comp[gene] = c;
    }

    for (size_t i = 0; i < genes.size(); ++i)
        for (size_t j = i + 1; j < genes.size(); ++j) {
            bool same = g.sigma.at(genes[i]) == g.sigma.at(genes[j]);
            bool edge = g.weight(genes[i], genes[j]) >= kOrthologyThreshold;
            bool insertable = comp[genes[i]] == comp[genes[j]];
            switch (spec.model) {
                case NoiseModel::Homologous:
                    if (same || (!edge && !insertable)) break;
                    if (unit(rng) < spec.p) {
                        if (edge)
                            out.theta.erase(gene_pair(genes[i], genes[j]));
                        else
                            out.set_weight(genes[i], genes[j], 1.0);
                    }
                    break;
                case NoiseModel::Orthologous:
                    if (same || edge || !insertable) break;
                    if (unit(rng) < spec.p) out.set_weight(genes[i], genes[j], 1.0);
                    break;
                case NoiseModel::Paralogous:
                    if (!edge) break;
                    if (unit(rng) < spec.p)
                        out.theta.erase(gene_pair(genes[i], genes[j]));
                    break;
                case NoiseModel::Xenologous:
                    break;
            }
        }
    return out;
}

namespace {

// Square assignment problem, O(n^3) shortest augmenting paths.
double hungarian(const std::vector<std::vector<double>>& cost) {
    size_t n = cost.size();
    if (n == 0) return 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0), v(n + 1, 0);
    std::vector<size_t> match(n + 1, 0);  // column -> row, 1-based
    for (size_t i = 1; i <= n; ++i) {
        match[0] = i;
        size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        std::vector<size_t> way(n + 1, 0);
        do {
            used[j0] = true;
            size_t i0 = match[j0], j1 = 0;
            double delta = inf;
            for (size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0;
    for (size_t j = 1; j <= n; ++j) total += cost[match[j] - 1][j - 1];
    return total;
}

std::vector<std::set<std::string>> inner_clusters(const RootedTree& t, bool with_root) {
    std::vector<std::set<std::string>> out;
    for (int v : t.inner_vertices()) {
        if (!with_root && v == t.root()) continue;
        out.push_back(t.leaf_set(v));
    }
    return out;
}

size_t symdiff_size(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::vector<std::string> d;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                  std::back_inserter(d));
    return d.size();
}

}  // namespace

Distances tree_distance(const RootedTree& t1, const RootedTree& t2) {
    std::vector<std::string> l1 = t1.leaf_labels(), l2 = t2.leaf_labels();
    if (l1 != l2) {
        std::vector<std::string> d;
        std::set_symmetric_difference(l1.begin(), l1.end(), l2.begin(), l2.end(),
                                      std::back_inserter(d));
        std::string msg = "leaf sets differ:";
        for (const auto& x : d) msg += " " + x;
        throw std::runtime_error(msg);
    }
    Distances out;

    // MC: match the non-trivial clusters, unmatched ones cost their size
    std::vector<std::set<std::string>> c1 = inner_clusters(t1, false);
    std::vector<std::set<std::string>> c2 = inner_clusters(t2, false);
    size_t m = std::max(c1.size(), c2.size());
    if (m > 0) {
        std::vector<std::vector<double>> cost(m, std::vector<double>(m, 0.0));
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < m; ++j) {
                if (i < c1.size() && j < c2.size())
                    cost[i][j] = static_cast<double>(symdiff_size(c1[i], c2[j]));
                else if (i < c1.size())
                    cost[i][j] = static_cast<double>(c1[i].size());
                else if (j < c2.size())
                    cost[i][j] = static_cast<double>(c2[j].size());
            }
        out.mc = hungarian(cost);
    }

    // RF over all clusters (the shared trivial ones cancel anyway)
    std::vector<std::set<std::string>> a1 = inner_clusters(t1, true);
    std::vector<std::set<std::string>> a2 = inner_clusters(t2, true);
    std::set<std::set<std::string>> s1(a1.begin(), a1.end()), s2(a2.begin(), a2.end());
    size_t rf2 = 0;
    for (const auto& c : s1) rf2 += s2.count(c) == 0;
    for (const auto& c : s2) rf2 += s1.count(c) == 0;
    out.rf = static_cast<double>(rf2) / 2.0;

    // NS over the full lca-depth matrix, l_xy = path length lca(x,y) -> x
    size_t n = l1.size();
    double sq = 0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            int x1 = t1.leaf_by_label(l1[i]), y1 = t1.leaf_by_label(l1[j]);
            int x2 = t2.leaf_by_label(l1[i]), y2 = t2.leaf_by_label(l1[j]);
            double d1 = t1.depth(x1) - t1.depth(t1.lca(x1, y1));
            double d2 = t2.depth(x2) - t2.depth(t2.lca(x2, y2));
            sq += (d1 - d2) * (d1 - d2);
        }
    out.ns = std::sqrt(sq);

    // TT: trios resolved in exactly one tree or differently in both
    TripleSet r1 = displayed_triples(t1);
    TripleSet r2 = displayed_triples(t2);
    std::map<std::set<std::string>, std::pair<const Triple*, const Triple*>> trios;
    for (const auto& [t, w] : r1.entries()) trios[t.leaf_set()].first = &t;
    for (const auto& [t, w] : r2.entries()) trios[t.leaf_set()].second = &t;
    size_t tt = 0;
    for (const auto& [k, pr] : trios) {
        if (!pr.first || !pr.second)
            ++tt;
        else if (*pr.first != *pr.second)
            ++tt;
    }
    out.tt = static_cast<double>(tt);
    return out;
}

Distances yule_normalizer(size_t n_leaves, size_t samples, uint64_t seed) {
    if (n_leaves < 4) throw std::invalid_argument("normalizer needs >= 4 leaves");
    static std::mutex mu;
    static std::map<std::tuple<size_t, size_t, uint64_t>, Distances> cache;
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find({n_leaves, samples, seed});
        if (it != cache.end()) return it->second;
    }
    std::vector<std::string> names;
    for (size_t i = 0; i < n_leaves; ++i) names.push_back("x" + std::to_string(i));
    std::mt19937_64 rng(seed);
    Distances acc;
    for (size_t s = 0; s < samples; ++s) {
        RootedTree a = random_yule_tree(rng, names);
        RootedTree b = random_yule_tree(rng, names);
        Distances d = tree_distance(a, b);
        acc.mc += d.mc;
        acc.rf += d.rf;
        acc.ns += d.ns;
        acc.tt += d.tt;
    }
    acc.mc /= static_cast<double>(samples);
    acc.rf /= static_cast<double>(samples);
    acc.ns /= static_cast<double>(samples);
    acc.tt /= static_cast<double>(samples);
    std::lock_guard<std::mutex> lk(mu);
    cache[{n_leaves, samples, seed}] = acc;
    return acc;
}

DistanceReport compare_trees(const RootedTree& t1, const RootedTree& t2,
                             size_t samples, uint64_t seed) {
    DistanceReport rep;
    rep.raw = tree_distance(t1, t2);
    Distances c = yule_normalizer(t1.leaf_labels().size(), samples, seed);
    auto norm = [](double raw, double k) { return k > 0 ? raw / k : raw; };
    rep.normalized.mc = norm(rep.raw.mc, c.mc);
    rep.normalized.rf = norm(rep.raw.rf, c.rf);
    rep.normalized.ns = norm(rep.raw.ns, c.ns);
    rep.normalized.tt = norm(rep.raw.tt, c.tt);
    return rep;
}

RootedTree majority_consensus(const std::vector<RootedTree>& trees) {
    if (trees.empty()) throw std::invalid_argument("no trees");
    std::vector<std::string> ref = trees[0].leaf_labels();
    std::map<std::set<std::string>, size_t> count;
    for (const auto& t : trees) {
        if (t.leaf_labels() != ref) throw std::runtime_error("leaf sets differ");
        for (const auto& c : inner_clusters(t, true)) ++count[c];
    }
    std::set<std::string> universe(ref.begin(), ref.end());
    Hierarchy h(universe);
    for (const auto& [c, k] : count)
        if (2 * k > trees.size()) h.insert(c);
    return tree_from_hierarchy(h);
}

}  // namespace pt
