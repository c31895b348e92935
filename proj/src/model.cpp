#include "pt/model.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <cstdio>
#include <functional>

namespace pt {

bool valid_label(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) return false;
        if (c == '(' || c == ')' || c == ',' || c == ';' || c == ':') return false;
    }
    return true;
}

const SpeciesId& SpeciesMap::at(const GeneId& g) const {
    auto it = gene_to_species.find(g);
    if (it == gene_to_species.end())
        throw std::runtime_error("gene not in species map: " + g);
    return it->second;
}

std::set<SpeciesId> SpeciesMap::species() const {
    std::set<SpeciesId> out;
    for (const auto& [g, s] : gene_to_species) out.insert(s);
    return out;
}

ParseError::ParseError(const std::string& msg, size_t offset)
    : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
      offset_(offset) {}

int RootedTree::add_leaf(const std::string& name) {
    if (!valid_label(name)) throw std::runtime_error("invalid leaf label: '" + name + "'");
    nodes_.push_back(Node{});
    nodes_.back().label = name;
    int v = static_cast<int>(nodes_.size()) - 1;
    if (root_ < 0) root_ = v;
    return v;
}

int RootedTree::add_inner(const std::vector<int>& children) {
    nodes_.push_back(Node{});
    int v = static_cast<int>(nodes_.size()) - 1;
    nodes_[v].children = children;
    for (int c : children) nodes_[c].parent = v;
    root_ = v;
    return v;
}

void RootedTree::set_root(int v) { root_ = v; }

std::vector<int> RootedTree::leaves() const {
    std::vector<int> out;
    for (size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].children.empty()) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<std::string> RootedTree::leaf_labels() const {
    std::vector<std::string> out;
    for (const auto& n : nodes_)
        if (n.children.empty()) out.push_back(n.label);
    std::sort(out.begin(), out.end());
    return out;
}

std::set<std::string> RootedTree::leaf_set(int v) const {
    std::set<std::string> out;
    std::vector<int> stack{v};
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        if (nodes_[u].children.empty()) out.insert(nodes_[u].label);
        for (int c : nodes_[u].children) stack.push_back(c);
    }
    return out;
}

std::vector<int> RootedTree::inner_vertices() const {
    std::vector<int> out;
    for (size_t i = 0; i < nodes_.size(); ++i)
        if (!nodes_[i].children.empty()) out.push_back(static_cast<int>(i));
    return out;
}

int RootedTree::depth(int v) const {
    int d = 0;
    while (nodes_[v].parent >= 0) {
        v = nodes_[v].parent;
        ++d;
    }
    return d;
}

int RootedTree::leaf_by_label(const std::string& name) const {
    for (size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].children.empty() && nodes_[i].label == name)
            return static_cast<int>(i);
    return -1;
}

void RootedTree::canonicalize() {
    if (root_ < 0) throw std::runtime_error("empty tree");
    // min leaf label below each vertex, bottom-up
    std::vector<std::string> minleaf(nodes_.size());
    std::function<void(int)> go = [&](int v) {
        if (nodes_[v].children.empty()) {
            minleaf[v] = nodes_[v].label;
            return;
        }
        if (nodes_[v].children.size() == 1)
            throw std::runtime_error("inner vertex with outdegree one");
        for (int c : nodes_[v].children) go(c);
        auto& ch = nodes_[v].children;
        std::sort(ch.begin(), ch.end(),
                  [&](int x, int y) { return minleaf[x] < minleaf[y]; });
        minleaf[v] = minleaf[ch.front()];
    };
    go(root_);
    auto labels = leaf_labels();
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
        throw std::runtime_error("duplicate leaf label");
}

int RootedTree::lca(int u, int v) const {
    int du = depth(u), dv = depth(v);
    while (du > dv) { u = nodes_[u].parent; --du; }
    while (dv > du) { v = nodes_[v].parent; --dv; }
    while (u != v) { u = nodes_[u].parent; v = nodes_[v].parent; }
    return u;
}

int RootedTree::lca_leaves(const std::vector<std::string>& names) const {
    if (names.empty()) throw std::runtime_error("lca of empty leaf set");
    int v = -1;
    for (const auto& name : names) {
        int l = leaf_by_label(name);
        if (l < 0) throw std::runtime_error("unknown leaf: " + name);
        v = (v < 0) ? l : lca(v, l);
    }
    return v;
}

Triple Triple::of(const std::string& x, const std::string& y, const std::string& out) {
    if (x == y || x == out || y == out)
        throw std::runtime_error("triple leaves must be distinct");
    Triple t;
    t.a = std::min(x, y);
    t.b = std::max(x, y);
    t.z = out;
    return t;
}

void TripleSet::add(const Triple& t, double w) {
    if (w < 0) throw std::runtime_error("negative triple weight");
    w_[t] += w;
    leaves_.insert(t.a);
    leaves_.insert(t.b);
    leaves_.insert(t.z);
}

void TripleSet::set_weight(const Triple& t, double w) {
    if (w < 0) throw std::runtime_error("negative triple weight");
    w_[t] = w;
    leaves_.insert(t.a);
    leaves_.insert(t.b);
    leaves_.insert(t.z);
}

double TripleSet::weight(const Triple& t) const {
    auto it = w_.find(t);
    return it == w_.end() ? 0.0 : it->second;
}

bool TripleSet::contains(const Triple& t) const { return w_.count(t) > 0; }

double TripleSet::total_weight() const {
    double s = 0;
    for (const auto& [t, w] : w_) s += w;
    return s;
}

Hierarchy::Hierarchy(const std::set<std::string>& universe) : universe_(universe) {
    clusters_.insert(universe);
    for (const auto& l : universe) clusters_.insert({l});
}

void Hierarchy::insert(const std::set<std::string>& cluster) {
    if (cluster.empty()) throw std::runtime_error("empty cluster");
    for (const auto& l : cluster)
        if (universe_.count(l) == 0)
            throw std::runtime_error("cluster element outside universe: " + l);
    clusters_.insert(cluster);
}

std::optional<std::pair<std::set<std::string>, std::set<std::string>>>
Hierarchy::incompatible_pair() const {
    for (auto p = clusters_.begin(); p != clusters_.end(); ++p) {
        for (auto q = std::next(p); q != clusters_.end(); ++q) {
            std::set<std::string> inter;
            std::set_intersection(p->begin(), p->end(), q->begin(), q->end(),
                                  std::inserter(inter, inter.begin()));
            if (inter.empty() || inter == *p || inter == *q) continue;
            return std::make_pair(*p, *q);
        }
    }
    return std::nullopt;
}

TripleSet displayed_triples(const RootedTree& t) {
    TripleSet out;
    auto leaves = t.leaves();
    for (int l : leaves) out.add_leaf(t.node(l).label);
    if (leaves.size() < 3) return out;
    for (size_t i = 0; i < leaves.size(); ++i)
        for (size_t j = i + 1; j < leaves.size(); ++j) {
            int lab = t.lca(leaves[i], leaves[j]);
            for (size_t k = 0; k < leaves.size(); ++k) {
                if (k == i || k == j) continue;
                int labc = t.lca(lab, leaves[k]);
                if (labc != lab)
                    out.add(Triple::of(t.node(leaves[i]).label,
                                       t.node(leaves[j]).label,
                                       t.node(leaves[k]).label),
                            1.0);
            }
        }
    // unit weight even if reached twice is impossible here: each (i,j,k) visited once
    return out;
}

Hierarchy hierarchy_of(const RootedTree& t) {
    auto labels = t.leaf_labels();
    Hierarchy h(std::set<std::string>(labels.begin(), labels.end()));
    for (int v : t.inner_vertices()) h.insert(t.leaf_set(v));
    return h;
}

RootedTree tree_from_hierarchy(const Hierarchy& h) {
    if (auto bad = h.incompatible_pair()) {
        auto fmt = [](const std::set<std::string>& c) {
            std::string s = "{";
            for (const auto& x : c) s += (s.size() > 1 ? "," : "") + x;
            return s + "}";
        };
        throw std::runtime_error("incompatible clusters " + fmt(bad->first) +
                                 " and " + fmt(bad->second));
    }
    std::vector<std::set<std::string>> cs(h.clusters().begin(), h.clusters().end());
    std::sort(cs.begin(), cs.end(), [](const auto& p, const auto& q) {
        if (p.size() != q.size()) return p.size() > q.size();
        return p < q;
    });
    RootedTree t;
    std::vector<int> vert(cs.size(), -1);
    std::vector<std::vector<int>> kids(cs.size());
    // parent of cluster i = nearest strictly containing cluster (appears earlier)
    for (size_t i = 0; i < cs.size(); ++i) {
        int parent = -1;
        size_t best = SIZE_MAX;
        for (size_t j = 0; j < i; ++j) {
            if (cs[j].size() <= cs[i].size()) continue;
            if (std::includes(cs[j].begin(), cs[j].end(), cs[i].begin(), cs[i].end()) &&
                cs[j].size() < best) {
                best = cs[j].size();
                parent = static_cast<int>(j);
            }
        }
        if (parent >= 0) kids[parent].push_back(static_cast<int>(i));
    }
    std::function<int(size_t)> make = [&](size_t i) -> int {
        if (cs[i].size() == 1) return t.add_leaf(*cs[i].begin());
        std::vector<int> ch;
        for (int k : kids[i]) ch.push_back(make(static_cast<size_t>(k)));
        if (ch.size() == 1) return ch[0];  // duplicate cluster collapses
        return t.add_inner(ch);
    };
    int r = make(0);
    t.set_root(r);
    t.canonicalize();
    return t;
}

// --- Newick ---

namespace {

struct NewickParser {
    const std::string& s;
    size_t pos = 0;

    explicit NewickParser(const std::string& text) : s(text) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    std::string read_token() {
        skip_ws();
        size_t start = pos;
        while (pos < s.size()) {
            char c = s[pos];
            if (c == '(' || c == ')' || c == ',' || c == ';' || c == ':' ||
                std::isspace(static_cast<unsigned char>(c)))
                break;
            ++pos;
        }
        return s.substr(start, pos - start);
    }
    void skip_branch_length() {
        if (peek() == ':') {
            ++pos;
            skip_ws();
            size_t start = pos;
            while (pos < s.size() &&
                   (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.' ||
                    s[pos] == '-' || s[pos] == '+' || s[pos] == 'e' || s[pos] == 'E'))
                ++pos;
            if (pos == start) throw ParseError("expected branch length after ':'", pos);
        }
    }
    int subtree(RootedTree& t) {
        if (peek() == '(') {
            size_t open = pos;
            ++pos;
            std::vector<int> children;
            children.push_back(subtree(t));
            while (peek() == ',') {
                ++pos;
                children.push_back(subtree(t));
            }
            if (peek() != ')') throw ParseError("unbalanced parentheses", open);
            ++pos;
            if (children.size() == 1)
                throw ParseError("inner vertex with a single child", open);
            int v = t.add_inner(children);
            std::string label = read_token();
            if (!label.empty()) t.node(v).label = label;
            skip_branch_length();
            return v;
        }
        size_t at = pos;
        std::string name = read_token();
        if (name.empty()) throw ParseError("empty leaf name", at);
        int v = t.add_leaf(name);
        skip_branch_length();
        return v;
    }
};

}  // namespace

RootedTree newick_parse(const std::string& text) {
    NewickParser p(text);
    RootedTree t;
    int r = p.subtree(t);
    t.set_root(r);
    if (p.peek() != ';') throw ParseError("expected ';' at end of tree", p.pos);
    ++p.pos;
    p.skip_ws();
    if (p.pos != text.size()) throw ParseError("trailing characters after ';'", p.pos);
    // inner labels of the form S/D become events; kept as plain labels too
    for (int v : t.inner_vertices()) {
        if (t.node(v).label == "S") t.node(v).event = static_cast<int>(Event::Speciation);
        if (t.node(v).label == "D") t.node(v).event = static_cast<int>(Event::Duplication);
    }
    try {
        t.canonicalize();
    } catch (const std::runtime_error& e) {
        throw ParseError(e.what(), p.pos);
    }
    return t;
}

std::string newick_write(const RootedTree& t, LabelMode mode) {
    RootedTree c = t;
    c.canonicalize();
    std::string out;
    std::function<void(int)> go = [&](int v) {
        if (c.is_leaf(v)) {
            out += c.node(v).label;
            return;
        }
        out += '(';
        bool first = true;
        for (int ch : c.node(v).children) {
            if (!first) out += ',';
            first = false;
            go(ch);
        }
        out += ')';
        if (mode == LabelMode::Event && c.node(v).event >= 0)
            out += (c.node(v).event == static_cast<int>(Event::Speciation)) ? "S" : "D";
        if (mode == LabelMode::Support && c.node(v).has_support) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3f", c.node(v).support);
            out += buf;
        }
    };
    go(c.root());
    out += ';';
    return out;
}

bool same_tree(const RootedTree& a, const RootedTree& b) {
    return newick_write(a) == newick_write(b);
}

RootedTree restrict_tree(const RootedTree& t, const std::set<std::string>& keep) {
    std::vector<std::string> labels = t.leaf_labels();
    std::set<std::string> have(labels.begin(), labels.end());
    std::set<std::string> universe;
    for (const auto& l : keep)
        if (have.count(l)) universe.insert(l);
    if (universe.empty()) throw std::runtime_error("restriction keeps no leaves");
    Hierarchy h(universe);
    Hierarchy src = hierarchy_of(t);
    for (const auto& c : src.clusters()) {
        std::set<std::string> cut;
        for (const auto& l : c)
            if (universe.count(l)) cut.insert(l);
        if (!cut.empty()) h.insert(cut);
    }
    return tree_from_hierarchy(h);
}

}  // namespace pt
