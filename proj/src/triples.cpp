#include "pt/triples.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>

namespace pt {

TripleSet extract_species_triples(const RootedTree& gene_tree, const SpeciesMap& sigma) {
    TripleSet out;
    std::vector<int> lv = gene_tree.leaves();
    for (int l : lv) out.add_leaf(sigma.at(gene_tree.node(l).label));
    if (lv.size() < 3) return out;
    size_t n = lv.size();
    std::vector<std::vector<int>> lca(n, std::vector<int>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            lca[i][j] = lca[j][i] = gene_tree.lca(lv[i], lv[j]);
    std::set<Triple> seen;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            for (size_t k = j + 1; k < n; ++k) {
                const SpeciesId& si = sigma.at(gene_tree.node(lv[i]).label);
                const SpeciesId& sj = sigma.at(gene_tree.node(lv[j]).label);
                const SpeciesId& sk = sigma.at(gene_tree.node(lv[k]).label);
                if (si == sj || si == sk || sj == sk) continue;
                int ij = lca[i][j], ik = lca[i][k], jk = lca[j][k];
                // resolved trio: two pairwise lcas coincide at the trio root,
                // the ingroup's lca lies strictly below it
                int root, in1, in2;
                const SpeciesId *s1, *s2, *s3;
                if (ik == jk && ij != ik) {
                    root = ik; in1 = static_cast<int>(i); in2 = static_cast<int>(j);
                    s1 = &si; s2 = &sj; s3 = &sk;
                } else if (ij == jk && ik != ij) {
                    root = ij; in1 = static_cast<int>(i); in2 = static_cast<int>(k);
                    s1 = &si; s2 = &sk; s3 = &sj;
                } else if (ij == ik && jk != ij) {
                    root = ij; in1 = static_cast<int>(j); in2 = static_cast<int>(k);
                    s1 = &sj; s2 = &sk; s3 = &si;
                } else {
                    continue;
                }
                (void)in1; (void)in2;
                if (gene_tree.node(root).event != static_cast<int>(Event::Speciation))
                    continue;
                seen.insert(Triple::of(*s1, *s2, *s3));
            }
    for (const auto& t : seen) out.add(t, 1.0);
    return out;
}

AhoGraph aho_graph(const TripleSet& r, const std::set<std::string>& s) {
    AhoGraph g;
    g.vertices.assign(s.begin(), s.end());
    for (const auto& [t, w] : r.entries()) {
        if (w <= 0) continue;
        if (s.count(t.a) && s.count(t.b) && s.count(t.z))
            g.edges.insert({t.a, t.b});
    }
    return g;
}

std::vector<std::vector<std::string>> AhoGraph::components() const {
    std::map<std::string, int> idx;
    for (size_t i = 0; i < vertices.size(); ++i) idx[vertices[i]] = static_cast<int>(i);
    std::vector<int> parent(vertices.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    for (const auto& [a, b] : edges) parent[find(idx.at(a))] = find(idx.at(b));
    std::map<int, std::vector<std::string>> by_root;
    for (size_t i = 0; i < vertices.size(); ++i)
        by_root[find(static_cast<int>(i))].push_back(vertices[i]);
    std::vector<std::vector<std::string>> out;
    for (auto& [k, c] : by_root) out.push_back(std::move(c));
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

namespace {
struct BuildFail {
    std::set<std::string> witness;
};
}  // namespace

ConsistencyReport build(const TripleSet& r, const std::set<std::string>& leaves) {
    for (const auto& [t, w] : r.entries())
        if (w > 0 && (!leaves.count(t.a) || !leaves.count(t.b) || !leaves.count(t.z)))
            throw std::runtime_error("triple leaf outside the given leaf set");
    if (leaves.empty()) throw std::runtime_error("empty leaf set");
    ConsistencyReport rep;
    RootedTree t;
    std::function<int(const std::set<std::string>&)> go =
        [&](const std::set<std::string>& s) -> int {
        if (s.size() == 1) return t.add_leaf(*s.begin());
        auto comps = aho_graph(r, s).components();
        if (comps.size() == 1) throw BuildFail{s};
        std::vector<int> children;
        for (const auto& c : comps)
            children.push_back(go(std::set<std::string>(c.begin(), c.end())));
        return t.add_inner(children);
    };
    try {
        t.set_root(go(leaves));
        t.canonicalize();
        rep.consistent = true;
        rep.tree = std::move(t);
    } catch (const BuildFail& f) {
        rep.consistent = false;
        rep.witness = f.witness;
    }
    return rep;
}

RootedTree refine_binary(const RootedTree& t) {
    RootedTree src = t;
    src.canonicalize();
    RootedTree out;
    std::function<int(int)> go = [&](int v) -> int {
        if (src.is_leaf(v)) return out.add_leaf(src.node(v).label);
        int acc = go(src.node(v).children[0]);
        for (size_t i = 1; i < src.node(v).children.size(); ++i)
            acc = out.add_inner({acc, go(src.node(v).children[i])});
        return acc;
    };
    out.set_root(go(src.root()));
    out.canonicalize();
    return out;
}

namespace {

std::set<std::string> triple_universe(const TripleSet& r) {
    std::set<std::string> u = r.leaves();
    for (const auto& [t, w] : r.entries()) {
        u.insert(t.a);
        u.insert(t.b);
        u.insert(t.z);
    }
    return u;
}

}  // namespace

TripleSet closure(const TripleSet& r) {
    std::set<std::string> u = triple_universe(r);
    if (!build(r, u).consistent)
        throw std::runtime_error("closure of an inconsistent triple set");
    TripleSet out;
    for (const auto& l : u) out.add_leaf(l);
    std::vector<std::string> ls(u.begin(), u.end());
    for (size_t i = 0; i < ls.size(); ++i)
        for (size_t j = i + 1; j < ls.size(); ++j)
            for (size_t k = j + 1; k < ls.size(); ++k) {
                Triple os[3] = {Triple::of(ls[i], ls[j], ls[k]),
                                Triple::of(ls[i], ls[k], ls[j]),
                                Triple::of(ls[j], ls[k], ls[i])};
                int ok = -1, cnt = 0;
                for (int o = 0; o < 3; ++o) {
                    TripleSet ext = r;
                    ext.add(os[o], 1.0);
                    if (build(ext, u).consistent) {
                        ok = o;
                        ++cnt;
                    }
                }
                // forced orientation: exactly one consistent extension
                if (cnt == 1)
                    out.add(os[ok], r.contains(os[ok]) ? r.weight(os[ok]) : 1.0);
            }
    return out;
}

TripleSet infer_2order(const Triple& r1, const Triple& r2) {
    TripleSet out;
    std::set<std::string> l1 = r1.leaf_set(), l2 = r2.leaf_set();
    std::vector<std::string> shared;
    for (const auto& x : l1)
        if (l2.count(x)) shared.push_back(x);
    if (shared.size() != 2) return out;
    auto ingroup = [](const Triple& r, const std::string& x) {
        return x == r.a || x == r.b;
    };
    auto other_in = [](const Triple& r, const std::string& x) {
        return x == r.a ? r.b : r.a;
    };
    int in_both = 0;
    std::string common_in, mixed;
    for (const auto& x : shared) {
        if (ingroup(r1, x) && ingroup(r2, x)) {
            ++in_both;
            common_in = x;
        } else {
            mixed = x;
        }
    }
    if (r1.z == r2.z) {
        // (ab|c),(ad|c) => (bd|c)
        if (in_both != 1) return out;  // identical ingroups would mean r1 == r2
        out.add(Triple::of(other_in(r1, common_in), other_in(r2, common_in), r1.z));
        return out;
    }
    if (in_both == 2) return out;  // (ab|c),(ab|d): nothing forced
    if (in_both == 1) {
        // (ab|c),(ad|b) => (bd|c),(ad|c) with a = shared ingroup, b = mixed
        const Triple& ra = (mixed == r2.z) ? r1 : r2;  // b sits in ra's ingroup
        const Triple& rb = (mixed == r2.z) ? r2 : r1;
        if (mixed != rb.z || !ingroup(ra, mixed)) return out;
        std::string c = ra.z, d = other_in(rb, common_in);
        out.add(Triple::of(mixed, d, c));
        out.add(Triple::of(common_in, d, c));
        return out;
    }
    // (ab|c),(cd|b) => (ab|d),(cd|a): both shared elements swap roles
    if (!ingroup(r1, r2.z) || !ingroup(r2, r1.z)) return out;
    std::string a = other_in(r1, r2.z), d = other_in(r2, r1.z);
    out.add(Triple::of(r1.a, r1.b, d));
    out.add(Triple::of(r2.a, r2.b, a));
    return out;
}

bool strictly_dense_consistent(const TripleSet& r) {
    std::set<std::string> u = triple_universe(r);
    std::vector<std::string> ls(u.begin(), u.end());
    size_t trios = ls.size() * (ls.size() - 1) * (ls.size() - 2) / 6;
    if (r.size() != trios)
        throw std::runtime_error("triple set is not strictly dense");
    for (size_t i = 0; i < ls.size(); ++i)
        for (size_t j = i + 1; j < ls.size(); ++j)
            for (size_t k = j + 1; k < ls.size(); ++k) {
                int cnt = r.contains(Triple::of(ls[i], ls[j], ls[k])) +
                          r.contains(Triple::of(ls[i], ls[k], ls[j])) +
                          r.contains(Triple::of(ls[j], ls[k], ls[i]));
                if (cnt != 1)
                    throw std::runtime_error("triple set is not strictly dense");
            }
    std::vector<Triple> ts;
    for (const auto& [t, w] : r.entries()) ts.push_back(t);
    for (size_t i = 0; i < ts.size(); ++i)
        for (size_t j = i + 1; j < ts.size(); ++j) {
            TripleSet inf = infer_2order(ts[i], ts[j]);
            for (const auto& [t, w] : inf.entries())
                if (!r.contains(t)) return false;
        }
    return true;
}

namespace {

struct TrioVars {
    std::vector<std::string> sp;  // sorted species
    std::map<Triple, int> var;    // orientation -> T' variable

    explicit TrioVars(const std::set<std::string>& universe)
        : sp(universe.begin(), universe.end()) {}

    void declare(ilp::Model& m) {
        for (size_t i = 0; i < sp.size(); ++i)
            for (size_t j = i + 1; j < sp.size(); ++j)
                for (size_t k = j + 1; k < sp.size(); ++k) {
                    Triple os[3] = {Triple::of(sp[i], sp[j], sp[k]),
                                    Triple::of(sp[i], sp[k], sp[j]),
                                    Triple::of(sp[j], sp[k], sp[i])};
                    std::string base = "T_" + std::to_string(i) + "_" +
                                       std::to_string(j) + "_" + std::to_string(k);
                    std::vector<ilp::Term> one;
                    for (int o = 0; o < 3; ++o) {
                        int v = m.add_var(base + "_" + std::to_string(o));
                        var[os[o]] = v;
                        one.push_back({v, 1.0});
                    }
                    m.add_constraint(one, ilp::Cmp::EQ, 1.0);  // one orientation per trio
                }
    }
};

}  // namespace

ilp::Model subset_model(const TripleSet& s) {
    std::set<std::string> u = triple_universe(s);
    if (u.size() < 3) throw std::runtime_error("selection model needs 3 species");
    ilp::Model m;
    TrioVars tv(u);
    tv.declare(m);
    const auto& sp = tv.sp;
    // closure rows for every ordered 4-tuple:
    // 2T'(ab|c) + 2T'(ad|b) - T'(bd|c) - T'(ad|c) <= 2
    size_t n = sp.size();
    for (size_t a = 0; a < n; ++a)
        for (size_t b = 0; b < n; ++b)
            for (size_t c = 0; c < n; ++c)
                for (size_t d = 0; d < n; ++d) {
                    if (a == b || a == c || a == d || b == c || b == d || c == d)
                        continue;
                    m.add_constraint(
                        {{tv.var.at(Triple::of(sp[a], sp[b], sp[c])), 2.0},
                         {tv.var.at(Triple::of(sp[a], sp[d], sp[b])), 2.0},
                         {tv.var.at(Triple::of(sp[b], sp[d], sp[c])), -1.0},
                         {tv.var.at(Triple::of(sp[a], sp[d], sp[c])), -1.0}},
                        ilp::Cmp::LE, 2.0);
                }
    // linking variables for the observed triples, appended last
    std::vector<ilp::Term> obj;
    int li = 0;
    for (const auto& [t, w] : s.entries()) {
        int tp = tv.var.at(t);
        int lv = m.add_var("L_" + std::to_string(li++));
        // 0 <= T' + 1 - 2L <= 1, so L tracks T' for observed triples
        m.add_constraint({{tp, 1.0}, {lv, -2.0}}, ilp::Cmp::GE, -1.0);
        m.add_constraint({{tp, 1.0}, {lv, -2.0}}, ilp::Cmp::LE, 0.0);
        obj.push_back({lv, w});
    }
    m.set_objective(true, obj);
    return m;
}

namespace {

SubsetResult from_consistent(const TripleSet& s, const RootedTree& aho,
                             const std::set<std::string>& u, bool exact) {
    SubsetResult out;
    out.sstar = s;
    for (const auto& l : u) out.sstar.add_leaf(l);
    out.sprime = displayed_triples(refine_binary(aho));
    for (const auto& l : u) out.sprime.add_leaf(l);
    out.exact = exact;
    return out;
}

}  // namespace

SubsetResult max_consistent_subset(const TripleSet& s,
                                   std::chrono::duration<double> time_limit) {
    std::set<std::string> u = triple_universe(s);
    SubsetResult out;
    if (u.size() < 3) {
        out.no_signal = true;
        for (const auto& l : u) out.sstar.add_leaf(l);
        for (const auto& l : u) out.sprime.add_leaf(l);
        return out;
    }
    ConsistencyReport rep = build(s, u);
    if (rep.consistent) return from_consistent(s, rep.tree, u, true);

    ilp::Model m = subset_model(s);
    ilp::Outcome o = ilp::solve(m, time_limit);
    if (o.status == ilp::Status::Optimal || o.status == ilp::Status::FeasibleIncumbent) {
        TrioVars tv(u);
        ilp::Model probe;  // rebuild the variable numbering only
        tv.declare(probe);
        for (const auto& l : u) {
            out.sprime.add_leaf(l);
            out.sstar.add_leaf(l);
        }
        for (const auto& [t, v] : tv.var)
            if (o.assignment[v]) out.sprime.add(t, 1.0);
        for (const auto& [t, w] : s.entries())
            if (o.assignment[tv.var.at(t)]) out.sstar.add(t, w);
        out.exact = (o.status == ilp::Status::Optimal);
        return out;
    }
    // no incumbent within the limit: greedy fallback, heaviest triples first
    std::vector<std::pair<Triple, double>> ts(s.entries().begin(), s.entries().end());
    std::stable_sort(ts.begin(), ts.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    TripleSet acc;
    for (const auto& l : u) acc.add_leaf(l);
    for (const auto& [t, w] : ts) {
        TripleSet ext = acc;
        ext.add(t, w);
        if (build(ext, u).consistent) acc = std::move(ext);
    }
    ConsistencyReport rep2 = build(acc, u);
    out = from_consistent(acc, rep2.tree, u, false);
    out.exact = false;
    return out;
}

}  // namespace pt
