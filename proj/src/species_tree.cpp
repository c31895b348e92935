#include "pt/species_tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pt {

RootedTree decode_matrix(const ClusterMatrix& m) {
    size_t n = m.species.size();
    for (const auto& col : m.cols)
        if (col.size() != n) throw std::runtime_error("matrix column of wrong height");
    // pairwise three-gamete check with a witness
    for (size_t p = 0; p < m.cols.size(); ++p)
        for (size_t q = p + 1; q < m.cols.size(); ++q) {
            int g01 = -1, g10 = -1, g11 = -1;
            for (size_t r = 0; r < n; ++r) {
                if (!m.cols[p][r] && m.cols[q][r]) g01 = static_cast<int>(r);
                if (m.cols[p][r] && !m.cols[q][r]) g10 = static_cast<int>(r);
                if (m.cols[p][r] && m.cols[q][r]) g11 = static_cast<int>(r);
            }
            if (g01 >= 0 && g10 >= 0 && g11 >= 0)
                throw std::runtime_error(
                    "incompatible columns " + std::to_string(p) + " and " +
                    std::to_string(q) + ": gametes 01@" + m.species[g01] + " 10@" +
                    m.species[g10] + " 11@" + m.species[g11]);
        }
    std::set<std::string> universe(m.species.begin(), m.species.end());
    Hierarchy h(universe);
    for (const auto& col : m.cols) {
        std::set<std::string> cluster;
        for (size_t r = 0; r < n; ++r)
            if (col[r]) cluster.insert(m.species[r]);
        if (!cluster.empty()) h.insert(cluster);
    }
    return tree_from_hierarchy(h);
}

namespace {

struct MatrixVars {
    std::vector<std::string> sp;
    size_t ncols;
    std::vector<int> y;                           // per column (min-vertices)
    std::vector<std::vector<int>> m;              // m[p][row]
    std::map<std::pair<size_t, size_t>, std::vector<int>> n_pair;  // (i<j) -> per column
};

MatrixVars declare_matrix(ilp::Model& model, const std::set<std::string>& universe,
                          bool with_y) {
    MatrixVars v;
    v.sp.assign(universe.begin(), universe.end());
    size_t n = v.sp.size();
    v.ncols = n - 2;
    double dn = static_cast<double>(n);
    // column-major so the search zeroes or fills whole columns early;
    // the column indicator precedes its entries because fixing it to 0
    // propagates the entire column away
    for (size_t p = 0; p < v.ncols; ++p) {
        std::vector<ilp::Term> col_sum;
        int yp = -1;
        if (with_y) yp = model.add_var("Y_" + std::to_string(p));
        v.m.emplace_back();
        for (size_t r = 0; r < n; ++r) {
            int mv = model.add_var("M_" + std::to_string(r) + "_" + std::to_string(p));
            v.m[p].push_back(mv);
            col_sum.push_back({mv, -1.0});
        }
        if (with_y) {
            v.y.push_back(yp);
            std::vector<ilp::Term> lo = col_sum, hi = col_sum;
            lo.push_back({yp, dn});
            hi.push_back({yp, dn});
            model.add_constraint(lo, ilp::Cmp::GE, 0.0);
            model.add_constraint(hi, ilp::Cmp::LE, dn - 1.0);
        }
    }
    // lexicographically non-increasing columns kill the permutation symmetry
    for (size_t p = 0; p + 1 < v.ncols; ++p) {
        std::vector<ilp::Term> terms;
        for (size_t r = 0; r < n; ++r) {
            double c = std::ldexp(1.0, static_cast<int>(n - 1 - r));
            terms.push_back({v.m[p][r], c});
            terms.push_back({v.m[p + 1][r], -c});
        }
        model.add_constraint(terms, ilp::Cmp::GE, 0.0);
    }
    // pair-in-cluster indicators
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            auto& vec = v.n_pair[{i, j}];
            for (size_t p = 0; p < v.ncols; ++p) {
                int nv = model.add_var("N_" + std::to_string(i) + "_" +
                                       std::to_string(j) + "_" + std::to_string(p));
                vec.push_back(nv);
                model.add_constraint(
                    {{v.m[p][i], 1.0}, {v.m[p][j], 1.0}, {nv, -2.0}}, ilp::Cmp::GE, 0.0);
                model.add_constraint(
                    {{v.m[p][i], 1.0}, {v.m[p][j], 1.0}, {nv, -2.0}}, ilp::Cmp::LE, 1.0);
            }
        }
    // three-gamete rows per ordered column pair
    for (size_t p = 0; p < v.ncols; ++p)
        for (size_t q = 0; q < v.ncols; ++q) {
            if (p == q) continue;
            std::string suffix = "_" + std::to_string(p) + "_" + std::to_string(q);
            int c01 = model.add_var("C01" + suffix);
            int c10 = model.add_var("C10" + suffix);
            int c11 = model.add_var("C11" + suffix);
            for (size_t r = 0; r < n; ++r) {
                model.add_constraint(
                    {{c01, 1.0}, {v.m[p][r], 1.0}, {v.m[q][r], -1.0}}, ilp::Cmp::GE, 0.0);
                model.add_constraint(
                    {{c10, 1.0}, {v.m[p][r], -1.0}, {v.m[q][r], 1.0}}, ilp::Cmp::GE, 0.0);
                model.add_constraint(
                    {{c11, 1.0}, {v.m[p][r], -1.0}, {v.m[q][r], -1.0}}, ilp::Cmp::GE,
                    -1.0);
            }
            model.add_constraint({{c01, 1.0}, {c10, 1.0}, {c11, 1.0}}, ilp::Cmp::LE, 2.0);
        }
    return v;
}

size_t index_of(const std::vector<std::string>& sp, const std::string& s) {
    return static_cast<size_t>(
        std::lower_bound(sp.begin(), sp.end(), s) - sp.begin());
}

}  // namespace

ilp::Model tree_model(const TripleSet& sstar, TreeMode mode) {
    if (mode == TreeMode::BuildOnly)
        throw std::runtime_error("no matrix model for the build-only mode");
    std::set<std::string> universe = sstar.leaves();
    for (const auto& [t, w] : sstar.entries()) {
        universe.insert(t.a);
        universe.insert(t.b);
        universe.insert(t.z);
    }
    if (universe.size() < 3) throw std::runtime_error("tree model needs 3 species");
    ilp::Model model;
    MatrixVars v = declare_matrix(model, universe, mode == TreeMode::MinVertices);
    size_t n = v.sp.size();
    auto npair = [&](size_t i, size_t j) -> const std::vector<int>& {
        return v.n_pair.at({std::min(i, j), std::max(i, j)});
    };
    // every selected triple must be witnessed by some cluster
    for (const auto& [t, w] : sstar.entries()) {
        size_t a = index_of(v.sp, t.a), b = index_of(v.sp, t.b), g = index_of(v.sp, t.z);
        std::vector<ilp::Term> row;
        for (size_t p = 0; p < v.ncols; ++p) {
            row.push_back({npair(a, b)[p], 1.0});
            row.push_back({npair(a, g)[p], -0.5});
            row.push_back({npair(b, g)[p], -0.5});
        }
        model.add_constraint(row, ilp::Cmp::GE, 1.0);
    }
    if (mode == TreeMode::MinVertices) {
        std::vector<ilp::Term> obj;
        for (int yv : v.y) obj.push_back({yv, 1.0});
        model.set_objective(false, obj);
        return model;
    }
    // count displayed triples: one indicator per orientation, forced up by
    // any cluster separating the trio
    std::vector<ilp::Term> obj;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            for (size_t k = j + 1; k < n; ++k) {
                size_t os[3][3] = {{i, j, k}, {i, k, j}, {j, k, i}};
                for (auto& o : os) {
                    int tv = model.add_var("That_" + std::to_string(o[0]) + "_" +
                                           std::to_string(o[1]) + "_" +
                                           std::to_string(o[2]));
                    for (size_t p = 0; p < v.ncols; ++p)
                        model.add_constraint({{v.m[p][o[0]], 1.0},
                                              {v.m[p][o[1]], 1.0},
                                              {v.m[p][o[2]], -1.0},
                                              {tv, -1.0}},
                                             ilp::Cmp::LE, 1.0);
                    obj.push_back({tv, 1.0});
                }
            }
    model.set_objective(false, obj);
    return model;
}

namespace {

bool is_binary(const RootedTree& t) {
    for (int v : t.inner_vertices())
        if (t.node(v).children.size() != 2) return false;
    return true;
}

double objective_of(const RootedTree& t, TreeMode mode) {
    if (mode == TreeMode::MinTriples)
        return static_cast<double>(displayed_triples(t).size());
    return static_cast<double>(t.inner_vertices().size());
}

}  // namespace

SpeciesTreeResult least_resolved_tree(const TripleSet& sstar, TreeMode mode,
                                      std::chrono::duration<double> time_limit) {
    std::set<std::string> universe = sstar.leaves();
    for (const auto& [t, w] : sstar.entries()) {
        universe.insert(t.a);
        universe.insert(t.b);
        universe.insert(t.z);
    }
    if (universe.empty()) throw std::runtime_error("no species");
    ConsistencyReport rep = build(sstar, universe);
    if (!rep.consistent)
        throw std::runtime_error("internal contract violation: inconsistent input");
    SpeciesTreeResult out;
    out.mode = mode;
    if (mode == TreeMode::BuildOnly || is_binary(rep.tree) || universe.size() < 3) {
        out.tree = rep.tree;
        out.objective = objective_of(out.tree, mode);
        return out;
    }
    ilp::Model model = tree_model(sstar, mode);
    ilp::Outcome o = ilp::solve(model, time_limit);
    if (o.status != ilp::Status::Optimal && o.status != ilp::Status::FeasibleIncumbent) {
        out.tree = rep.tree;  // valid displayer, minimality not certified
        out.objective = objective_of(out.tree, mode);
        out.exact = false;
        return out;
    }
    ClusterMatrix cm;
    cm.species.assign(universe.begin(), universe.end());
    ilp::Model probe;
    MatrixVars v = declare_matrix(probe, universe, mode == TreeMode::MinVertices);
    for (size_t p = 0; p < v.ncols; ++p) {
        std::vector<uint8_t> col;
        for (size_t r = 0; r < cm.species.size(); ++r)
            col.push_back(o.assignment[v.m[p][r]]);
        cm.cols.push_back(std::move(col));
    }
    out.tree = decode_matrix(cm);
    out.objective = objective_of(out.tree, mode);
    out.exact = (o.status == ilp::Status::Optimal);
    return out;
}

SupportReport support_values(RootedTree& tree, const TripleSet& sstar,
                             const TripleSet& extracted) {
    SupportReport rep;
    double num = 0, den = 0;
    for (const auto& [t, w] : sstar.entries()) {
        double wr = extracted.weight(t);
        num += wr;
        den += wr + extracted.weight(Triple::of(t.a, t.z, t.b)) +
               extracted.weight(Triple::of(t.b, t.z, t.a));
    }
    rep.s = den > 0 ? num / den : 1.0;
    std::set<std::string> all = tree.leaf_set(tree.root());
    for (int v : tree.inner_vertices()) {
        std::set<std::string> inside = tree.leaf_set(v);
        double n2 = 0, d2 = 0;
        std::vector<std::string> in(inside.begin(), inside.end());
        for (size_t i = 0; i < in.size(); ++i)
            for (size_t j = i + 1; j < in.size(); ++j)
                for (const auto& g : all) {
                    if (inside.count(g)) continue;
                    n2 += extracted.weight(Triple::of(in[i], in[j], g));
                    d2 += extracted.weight(Triple::of(in[i], in[j], g)) +
                          extracted.weight(Triple::of(in[i], g, in[j])) +
                          extracted.weight(Triple::of(in[j], g, in[i]));
                }
        double sv = 1.0;
        if (d2 > 0) {
            sv = n2 / d2;
        } else {
            rep.unsupported.insert(v);
            tree.node(v).unsupported = true;
        }
        rep.per_vertex[v] = sv;
        tree.node(v).support = sv;
        tree.node(v).has_support = true;
    }
    return rep;
}

}  // namespace pt
