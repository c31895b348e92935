#include "pt/cograph.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace pt {

double OrthologyEstimate::weight(const GeneId& x, const GeneId& y) const {
    auto it = theta.find(gene_pair(x, y));
    return it == theta.end() ? 0.0 : it->second;
}

void OrthologyEstimate::set_weight(const GeneId& x, const GeneId& y, double w) {
    if (x == y) throw std::runtime_error("self-pair in orthology estimate: " + x);
    if (w < 0.0 || w > 1.0) throw std::runtime_error("orthology weight outside [0,1]");
    genes.insert(x);
    genes.insert(y);
    theta[gene_pair(x, y)] = w;
}

void OrthologyEstimate::validate() const {
    for (const auto& g : genes)
        if (!sigma.contains(g))
            throw std::runtime_error("gene missing from species map: " + g);
}

std::set<GenePair> Component::estimated_edges() const {
    std::set<GenePair> out;
    for (const auto& [p, w] : theta)
        if (w >= kOrthologyThreshold) out.insert(p);
    return out;
}

namespace {

struct Dsu {
    std::vector<int> parent;
    explicit Dsu(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

// adjacency as bit rows for the O(n^3/64) P4 scan
struct BitGraph {
    std::vector<GeneId> genes;  // sorted
    std::map<GeneId, int> idx;
    size_t words;
    std::vector<std::vector<uint64_t>> adj;

    BitGraph(const std::vector<GeneId>& gs, const std::set<GenePair>& edges)
        : genes(gs) {
        std::sort(genes.begin(), genes.end());
        for (size_t i = 0; i < genes.size(); ++i) idx[genes[i]] = static_cast<int>(i);
        words = (genes.size() + 63) / 64;
        adj.assign(genes.size(), std::vector<uint64_t>(words, 0));
        for (const auto& [a, b] : edges) {
            int i = idx.at(a), j = idx.at(b);
            adj[i][j / 64] |= 1ull << (j % 64);
            adj[j][i / 64] |= 1ull << (i % 64);
        }
    }

    bool has(int i, int j) const { return (adj[i][j / 64] >> (j % 64)) & 1; }
};

int lowest_bit(const std::vector<uint64_t>& row) {
    for (size_t w = 0; w < row.size(); ++w)
        if (row[w]) return static_cast<int>(w * 64 + std::countr_zero(row[w]));
    return -1;
}

}  // namespace

std::optional<std::array<GeneId, 4>> find_p4(const std::vector<GeneId>& genes,
                                             const std::set<GenePair>& edges) {
    if (genes.size() < 4) return std::nullopt;
    BitGraph g(genes, edges);
    int n = static_cast<int>(g.genes.size());
    std::vector<uint64_t> a(g.words), b(g.words), c(g.words);
    // every P4 w-x-y-z is found at its middle edge {x,y}:
    // w adjacent to x only, z adjacent to y only, w and z non-adjacent
    for (int x = 0; x < n; ++x) {
        for (int y = x + 1; y < n; ++y) {
            if (!g.has(x, y)) continue;
            for (size_t w = 0; w < g.words; ++w) {
                a[w] = g.adj[x][w] & ~g.adj[y][w];
                b[w] = g.adj[y][w] & ~g.adj[x][w];
            }
            a[y / 64] &= ~(1ull << (y % 64));
            b[x / 64] &= ~(1ull << (x % 64));
            for (size_t w = 0; w < g.words; ++w) {
                uint64_t bits = a[w];
                while (bits) {
                    int wi = static_cast<int>(w * 64 + std::countr_zero(bits));
                    bits &= bits - 1;
                    for (size_t u = 0; u < g.words; ++u) c[u] = b[u] & ~g.adj[wi][u];
                    int zi = lowest_bit(c);
                    if (zi >= 0)
                        return std::array<GeneId, 4>{g.genes[wi], g.genes[x],
                                                     g.genes[y], g.genes[zi]};
                }
            }
        }
    }
    return std::nullopt;
}

std::vector<Component> connected_components(const OrthologyEstimate& g) {
    g.validate();
    std::vector<GeneId> gs(g.genes.begin(), g.genes.end());
    std::map<GeneId, int> idx;
    for (size_t i = 0; i < gs.size(); ++i) idx[gs[i]] = static_cast<int>(i);
    Dsu dsu(gs.size());
    for (const auto& [p, w] : g.theta)
        if (w >= kOrthologyThreshold) dsu.unite(idx[p.first], idx[p.second]);
    std::map<int, Component> by_root;  // keyed by smallest member index
    std::vector<int> root_key(gs.size(), -1);
    for (size_t i = 0; i < gs.size(); ++i) {
        int r = dsu.find(static_cast<int>(i));
        if (root_key[r] < 0) root_key[r] = static_cast<int>(i);
        Component& c = by_root[root_key[r]];
        c.genes.push_back(gs[i]);
        c.species[gs[i]] = g.sigma.at(gs[i]);
    }
    for (const auto& [p, w] : g.theta) {
        int r = root_key[dsu.find(idx[p.first])];
        int r2 = root_key[dsu.find(idx[p.second])];
        if (r == r2) by_root[r].theta[p] = w;
        // cross-component weights are all < threshold; dropped, they can
        // never become edges (edits stay within components)
    }
    std::vector<Component> out;
    for (auto& [k, c] : by_root) out.push_back(std::move(c));
    return out;
}

double edit_cost(const Component& c, const std::set<GenePair>& edges) {
    double cost = 0.0;
    for (const auto& [p, w] : c.theta) cost += edges.count(p) ? 1.0 - w : w;
    for (const auto& p : edges)
        if (!c.theta.count(p)) cost += 1.0;
    return cost;
}

ilp::Model editing_model(const Component& c) {
    std::vector<GeneId> gs = c.genes;
    std::sort(gs.begin(), gs.end());
    int n = static_cast<int>(gs.size());
    ilp::Model m;
    std::map<GenePair, int> var;
    std::vector<ilp::Term> obj;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            GenePair p = gene_pair(gs[i], gs[j]);
            int v = m.add_var("E_" + p.first + "_" + p.second);
            var[p] = v;
            auto it = c.theta.find(p);
            double th = it == c.theta.end() ? 0.0 : it->second;
            obj.push_back({v, 1.0 - 2.0 * th});  // + constant sum(theta)
            if (c.species.at(p.first) == c.species.at(p.second)) m.fix(v, 0);
        }
    m.set_objective(false, obj);
    auto e = [&](int i, int j) { return var.at(gene_pair(gs[i], gs[j])); };
    // one row per induced-P4 ordering; reversals dropped
    std::array<int, 4> q;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            for (int d = b + 1; d < n; ++d)
                for (int f = d + 1; f < n; ++f) {
                    q = {a, b, d, f};
                    std::sort(q.begin(), q.end());
                    do {
                        if (q[0] > q[3]) continue;
                        m.add_constraint({{e(q[0], q[1]), 1.0},
                                          {e(q[1], q[2]), 1.0},
                                          {e(q[2], q[3]), 1.0},
                                          {e(q[0], q[2]), -1.0},
                                          {e(q[1], q[3]), -1.0},
                                          {e(q[0], q[3]), -1.0}},
                                         ilp::Cmp::LE, 2.0);
                    } while (std::next_permutation(q.begin(), q.end()));
                }
    return m;
}

namespace {

std::set<GenePair> fallback_edges(const Component& c) {
    std::set<GenePair> edges;
    for (const auto& p : c.estimated_edges())
        if (c.species.at(p.first) != c.species.at(p.second)) edges.insert(p);
    while (auto p4 = find_p4(c.genes, edges))
        edges.erase(gene_pair((*p4)[1], (*p4)[2]));
    return edges;
}

EditedComponent finish(const Component& c, std::set<GenePair> edges, EditStatus st) {
    EditedComponent out;
    out.genes = c.genes;
    std::sort(out.genes.begin(), out.genes.end());
    out.status = st;
    out.cost = edit_cost(c, edges);
    std::set<GenePair> est = c.estimated_edges();
    for (const auto& p : edges)
        if (!est.count(p)) out.inserted.push_back(p);
    for (const auto& p : est)
        if (!edges.count(p)) out.deleted.push_back(p);
    out.edges = std::move(edges);
    return out;
}

}  // namespace

EditedComponent cograph_edit(const Component& c,
                             std::chrono::duration<double> time_limit,
                             size_t size_limit) {
    std::set<GenePair> est = c.estimated_edges();
    bool clean = true;
    for (const auto& p : est)
        if (c.species.at(p.first) == c.species.at(p.second)) clean = false;
    if (clean && !find_p4(c.genes, est))
        return finish(c, std::move(est), EditStatus::Optimal);
    if (c.genes.size() > size_limit)
        return finish(c, fallback_edges(c), EditStatus::SkippedTooLarge);

    ilp::Model m = editing_model(c);
    ilp::Outcome o = ilp::solve(m, time_limit);
    if (o.status == ilp::Status::Optimal || o.status == ilp::Status::FeasibleIncumbent) {
        std::vector<GeneId> gs = c.genes;
        std::sort(gs.begin(), gs.end());
        std::set<GenePair> edges;
        int v = 0;
        for (size_t i = 0; i < gs.size(); ++i)
            for (size_t j = i + 1; j < gs.size(); ++j, ++v)
                if (o.assignment[v]) edges.insert(gene_pair(gs[i], gs[j]));
        return finish(c, std::move(edges),
                      o.status == ilp::Status::Optimal ? EditStatus::Optimal
                                                       : EditStatus::TimeLimitedIncumbent);
    }
    // timed out before any leaf of the search tree; degrade like oversized
    return finish(c, fallback_edges(c), EditStatus::TimeLimitedIncumbent);
}

RootedTree cotree(const std::vector<GeneId>& genes, const std::set<GenePair>& edges) {
    BitGraph g(genes, edges);
    RootedTree t;
    // components of the subset under adj, or under its complement
    auto split = [&](const std::vector<int>& subset, bool complement) {
        std::vector<std::vector<int>> comps;
        std::set<int> left(subset.begin(), subset.end());
        while (!left.empty()) {
            std::vector<int> comp, stack{*left.begin()};
            left.erase(left.begin());
            while (!stack.empty()) {
                int v = stack.back();
                stack.pop_back();
                comp.push_back(v);
                for (auto it = left.begin(); it != left.end();) {
                    bool adj = g.has(v, *it);
                    if (complement ? !adj : adj) {
                        stack.push_back(*it);
                        it = left.erase(it);
                    } else {
                        ++it;
                    }
                }
            }
            std::sort(comp.begin(), comp.end());
            comps.push_back(std::move(comp));
        }
        return comps;
    };
    std::function<int(const std::vector<int>&)> go = [&](const std::vector<int>& sub) {
        if (sub.size() == 1) return t.add_leaf(g.genes[sub[0]]);
        auto comps = split(sub, false);
        Event ev = Event::Duplication;  // union vertex
        if (comps.size() == 1) {
            comps = split(sub, true);
            ev = Event::Speciation;  // join vertex
            if (comps.size() == 1) {
                std::set<GenePair> sub_edges;
                std::vector<GeneId> sub_genes;
                for (int i : sub) sub_genes.push_back(g.genes[i]);
                for (size_t i = 0; i < sub.size(); ++i)
                    for (size_t j = i + 1; j < sub.size(); ++j)
                        if (g.has(sub[i], sub[j]))
                            sub_edges.insert(gene_pair(g.genes[sub[i]], g.genes[sub[j]]));
                auto p4 = find_p4(sub_genes, sub_edges);
                throw NotCographError(
                    "not a cograph: induced path " + (*p4)[0] + "-" + (*p4)[1] + "-" +
                        (*p4)[2] + "-" + (*p4)[3],
                    *p4);
            }
        }
        std::vector<int> children;
        for (const auto& comp : comps) children.push_back(go(comp));
        int v = t.add_inner(children);
        t.node(v).event = static_cast<int>(ev);
        return v;
    };
    std::vector<int> all(g.genes.size());
    std::iota(all.begin(), all.end(), 0);
    t.set_root(go(all));
    t.canonicalize();
    return t;
}

}  // namespace pt
