#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "kummer/cover.hpp"
#include "kummer/errors.hpp"
#include "kummer/freegroup.hpp"
#include "kummer/schreier.hpp"

namespace kummer {

struct Edge {
    int src;
    int label; // generator index in [1, rank]; traversed backwards it reads x_label^-1
    int dst;
    auto operator<=>(const Edge&) const = default;
};

/// Basepointed graph with edges labelled by free generators. Graphs returned
/// by fold(), graph_from_words() and product_graph() are folded
/// (deterministic and co-deterministic), connected, core-pruned, and
/// numbered canonically: vertex ids follow a breadth-first search from the
/// basepoint (id 0) that visits labels in the order x1, x1^-1, x2, ...
/// Two such graphs are isomorphic as pointed labelled graphs iff they are
/// equal.
class StallingsGraph {
public:
    StallingsGraph(int rank, int vertex_count, int basepoint, std::vector<Edge> edges)
        : rank_(rank), vertex_count_(vertex_count), basepoint_(basepoint), edges_(std::move(edges)) {
        if (rank < 0 || vertex_count < 1 || basepoint < 0 || basepoint >= vertex_count)
            throw DomainError("StallingsGraph: bad shape");
        for (const auto& e : edges_)
            if (e.src < 0 || e.src >= vertex_count || e.dst < 0 || e.dst >= vertex_count || e.label < 1 ||
                e.label > rank)
                throw DomainError("StallingsGraph: edge out of range");
        out_.assign(static_cast<std::size_t>(vertex_count) * static_cast<std::size_t>(rank), -1);
        in_ = out_;
        folded_ = true;
        for (const auto& e : edges_) {
            auto& o = out_[slot(e.src, e.label)];
            auto& i = in_[slot(e.dst, e.label)];
            if (o != -1 || i != -1)
                folded_ = false;
            o = e.dst;
            i = e.src;
        }
    }

    // single vertex, no edges: the trivial subgroup
    static StallingsGraph trivial(int rank) { return {rank, 1, 0, {}}; }

    int rank() const noexcept { return rank_; }
    int vertex_count() const noexcept { return vertex_count_; }
    int basepoint() const noexcept { return basepoint_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    bool is_folded() const noexcept { return folded_; }

    // target of the x_label (sign > 0) or x_label^-1 (sign < 0) edge at v, or -1
    int step(int v, int label, int sign) const {
        return sign > 0 ? out_[slot(v, label)] : in_[slot(v, label)];
    }

    bool is_connected() const {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(vertex_count_));
        for (const auto& e : edges_) {
            adj[static_cast<std::size_t>(e.src)].push_back(e.dst);
            adj[static_cast<std::size_t>(e.dst)].push_back(e.src);
        }
        std::vector<char> seen(static_cast<std::size_t>(vertex_count_), 0);
        std::vector<int> stack{basepoint_};
        seen[static_cast<std::size_t>(basepoint_)] = 1;
        int count = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w : adj[static_cast<std::size_t>(v)])
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    ++count;
                    stack.push_back(w);
                }
        }
        return count == vertex_count_;
    }

    friend bool operator==(const StallingsGraph& a, const StallingsGraph& b) {
        return a.rank_ == b.rank_ && a.vertex_count_ == b.vertex_count_ && a.basepoint_ == b.basepoint_ &&
               a.edges_ == b.edges_;
    }

private:
    std::size_t slot(int v, int label) const {
        return static_cast<std::size_t>(v) * static_cast<std::size_t>(rank_) + static_cast<std::size_t>(label - 1);
    }

    int rank_;
    int vertex_count_;
    int basepoint_;
    std::vector<Edge> edges_;
    std::vector<int> out_;
    std::vector<int> in_;
    bool folded_ = true;
};

namespace detail {

// Drop vertices outside the basepoint component, then strip hanging trees
// not containing the basepoint.
inline StallingsGraph core_of(int rank, int vertex_count, int basepoint, const std::vector<Edge>& edges) {
    const auto nv = static_cast<std::size_t>(vertex_count);
    std::vector<std::vector<std::size_t>> inc(nv);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        inc[static_cast<std::size_t>(edges[k].src)].push_back(k);
        inc[static_cast<std::size_t>(edges[k].dst)].push_back(k);
    }
    std::vector<char> alive_v(nv, 0), alive_e(edges.size(), 1);
    {
        std::vector<int> stack{basepoint};
        alive_v[static_cast<std::size_t>(basepoint)] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (auto k : inc[static_cast<std::size_t>(v)]) {
                const int w = edges[k].src == v ? edges[k].dst : edges[k].src;
                if (!alive_v[static_cast<std::size_t>(w)]) {
                    alive_v[static_cast<std::size_t>(w)] = 1;
                    stack.push_back(w);
                }
            }
        }
    }
    for (std::size_t k = 0; k < edges.size(); ++k)
        if (!alive_v[static_cast<std::size_t>(edges[k].src)])
            alive_e[k] = 0;

    std::vector<int> degree(nv, 0);
    for (std::size_t k = 0; k < edges.size(); ++k)
        if (alive_e[k]) {
            ++degree[static_cast<std::size_t>(edges[k].src)];
            ++degree[static_cast<std::size_t>(edges[k].dst)];
        }
    std::vector<int> leaves;
    for (std::size_t v = 0; v < nv; ++v)
        if (alive_v[v] && static_cast<int>(v) != basepoint && degree[v] <= 1)
            leaves.push_back(static_cast<int>(v));
    while (!leaves.empty()) {
        const int v = leaves.back();
        leaves.pop_back();
        if (!alive_v[static_cast<std::size_t>(v)])
            continue;
        alive_v[static_cast<std::size_t>(v)] = 0;
        for (auto k : inc[static_cast<std::size_t>(v)]) {
            if (!alive_e[k])
                continue;
            alive_e[k] = 0;
            const int w = edges[k].src == v ? edges[k].dst : edges[k].src;
            auto& dw = degree[static_cast<std::size_t>(w)];
            --dw;
            if (w != basepoint && alive_v[static_cast<std::size_t>(w)] && dw <= 1)
                leaves.push_back(w);
        }
    }

    std::vector<int> remap(nv, -1);
    int next = 0;
    for (std::size_t v = 0; v < nv; ++v)
        if (alive_v[v])
            remap[v] = next++;
    std::vector<Edge> kept;
    for (std::size_t k = 0; k < edges.size(); ++k)
        if (alive_e[k])
            kept.push_back({remap[static_cast<std::size_t>(edges[k].src)], edges[k].label,
                            remap[static_cast<std::size_t>(edges[k].dst)]});
    return {rank, next, remap[static_cast<std::size_t>(basepoint)], std::move(kept)};
}

} // namespace detail

/// Canonical numbering of a folded connected graph (see StallingsGraph).
inline StallingsGraph canonical(const StallingsGraph& g) {
    if (!g.is_folded())
        throw DomainError("canonical: graph is not folded");
    std::vector<int> order(static_cast<std::size_t>(g.vertex_count()), -1);
    std::deque<int> queue{g.basepoint()};
    order[static_cast<std::size_t>(g.basepoint())] = 0;
    int next = 1;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int label = 1; label <= g.rank(); ++label)
            for (int sign : {1, -1}) {
                const int w = g.step(v, label, sign);
                if (w >= 0 && order[static_cast<std::size_t>(w)] < 0) {
                    order[static_cast<std::size_t>(w)] = next++;
                    queue.push_back(w);
                }
            }
    }
    if (next != g.vertex_count())
        throw DomainError("canonical: graph is not connected");
    std::vector<Edge> edges;
    edges.reserve(g.edges().size());
    for (const auto& e : g.edges())
        edges.push_back({order[static_cast<std::size_t>(e.src)], e.label, order[static_cast<std::size_t>(e.dst)]});
    std::sort(edges.begin(), edges.end());
    return {g.rank(), g.vertex_count(), 0, std::move(edges)};
}

/// Stallings folding: identify equally labelled edges sharing an endpoint
/// until none remain, then restrict to the core of the basepoint component.
///
/// Union-find over vertices; each class keeps a star map from signed label to
/// a neighbour. Merging two classes unions their stars and queues the
/// neighbours that collide. With an order seed the edge insertion order and
/// the merge order are shuffled; the result does not depend on either.
inline StallingsGraph fold(const StallingsGraph& g, std::optional<std::uint64_t> order_seed = std::nullopt) {
    const auto nv = static_cast<std::size_t>(g.vertex_count());
    std::vector<int> parent(nv);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<std::map<int, int>> star(nv);
    std::vector<std::pair<int, int>> pending;
    std::optional<std::mt19937_64> rng;
    if (order_seed)
        rng.emplace(*order_seed);

    auto find = [&](int v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            auto& p = parent[static_cast<std::size_t>(v)];
            p = parent[static_cast<std::size_t>(p)];
            v = p;
        }
        return v;
    };
    auto merge = [&](int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b)
            return;
        if (star[static_cast<std::size_t>(a)].size() < star[static_cast<std::size_t>(b)].size())
            std::swap(a, b);
        parent[static_cast<std::size_t>(b)] = a;
        auto& sa = star[static_cast<std::size_t>(a)];
        for (const auto& [lab, x] : star[static_cast<std::size_t>(b)]) {
            auto it = sa.find(lab);
            if (it == sa.end())
                sa.emplace(lab, x);
            else
                pending.emplace_back(it->second, x);
        }
        star[static_cast<std::size_t>(b)].clear();
    };
    auto drain = [&] {
        while (!pending.empty()) {
            std::size_t k = pending.size() - 1;
            if (rng)
                k = std::uniform_int_distribution<std::size_t>(0, pending.size() - 1)(*rng);
            const auto [a, b] = pending[k];
            pending[k] = pending.back();
            pending.pop_back();
            merge(a, b);
        }
    };
    auto add_edge = [&](int u, int label, int v) {
        u = find(u);
        v = find(v);
        auto& su = star[static_cast<std::size_t>(u)];
        if (auto it = su.find(label); it != su.end()) {
            pending.emplace_back(it->second, v);
            return;
        }
        su.emplace(label, v);
        auto& sv = star[static_cast<std::size_t>(v)];
        if (auto it = sv.find(-label); it != sv.end())
            pending.emplace_back(it->second, u);
        else
            sv.emplace(-label, u);
    };

    std::vector<Edge> edges = g.edges();
    if (rng)
        std::shuffle(edges.begin(), edges.end(), *rng);
    for (const auto& e : edges) {
        add_edge(e.src, e.label, e.dst);
        if (!rng || (*rng)() % 2 == 0)
            drain();
    }
    drain();

    std::vector<Edge> folded;
    for (std::size_t v = 0; v < nv; ++v) {
        if (find(static_cast<int>(v)) != static_cast<int>(v))
            continue;
        for (const auto& [lab, x] : star[v])
            if (lab > 0)
                folded.push_back({static_cast<int>(v), lab, find(x)});
    }
    StallingsGraph core = detail::core_of(g.rank(), g.vertex_count(), find(g.basepoint()), folded);
    if (!core.is_folded())
        throw ConsistencyError("fold: result is not folded");
    return canonical(core);
}

/// Unfolded wedge of one closed petal per word at the basepoint.
inline StallingsGraph bouquet(int rank, const std::vector<Word>& words) {
    int vertices = 1;
    std::vector<Edge> edges;
    for (const auto& w : words) {
        if (w.rank() != rank)
            throw DomainError("graph_from_words: word rank mismatch");
        const auto len = w.length();
        if (len == 0)
            continue;
        int cur = 0;
        std::int64_t pos = 0;
        for (const auto& s : w.syllables()) {
            const int sign = s.exp > 0 ? 1 : -1;
            for (std::int64_t k = 0; k < s.exp * sign; ++k) {
                ++pos;
                const int nxt = pos == len ? 0 : vertices++;
                if (sign > 0)
                    edges.push_back({cur, s.gen, nxt});
                else
                    edges.push_back({nxt, s.gen, cur});
                cur = nxt;
            }
        }
    }
    return StallingsGraph(rank, vertices, 0, std::move(edges));
}

/// Folded core graph of the subgroup generated by the given words.
inline StallingsGraph graph_from_words(int rank, const std::vector<Word>& words,
                                       std::optional<std::uint64_t> order_seed = std::nullopt) {
    return fold(bouquet(rank, words), order_seed);
}

// first Betti number of the core
inline std::int64_t rank(const StallingsGraph& g) {
    if (!g.is_connected())
        throw DomainError("rank: graph is not connected");
    return static_cast<std::int64_t>(g.edges().size()) - g.vertex_count() + 1;
}

/// True iff w reads a closed path at the basepoint. A missing edge rejects.
inline bool membership_graph(const StallingsGraph& g, const Word& w) {
    if (!g.is_folded())
        throw DomainError("membership_graph: graph is not folded");
    if (w.rank() != g.rank())
        throw DomainError("membership_graph: rank mismatch");
    int v = g.basepoint();
    for (const auto& s : w.syllables()) {
        const int sign = s.exp > 0 ? 1 : -1;
        for (std::int64_t k = 0; k < s.exp * sign; ++k) {
            v = g.step(v, s.gen, sign);
            if (v < 0)
                return false;
        }
    }
    return v == g.basepoint();
}

/// Basepoint component of the label-matched fiber product; its fundamental
/// group is the intersection of the two subgroups.
inline StallingsGraph product_graph(const StallingsGraph& a, const StallingsGraph& b) {
    if (a.rank() != b.rank())
        throw DomainError("product_graph: rank mismatch");
    if (!a.is_folded() || !b.is_folded())
        throw DomainError("product_graph: inputs must be folded");
    std::map<std::pair<int, int>, int> id;
    std::vector<std::pair<int, int>> pairs;
    std::vector<Edge> edges;
    auto intern = [&](int x, int y) {
        auto [it, inserted] = id.try_emplace({x, y}, static_cast<int>(pairs.size()));
        if (inserted)
            pairs.emplace_back(x, y);
        return it->second;
    };
    intern(a.basepoint(), b.basepoint());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [x, y] = pairs[k];
        const int here = static_cast<int>(k);
        for (int label = 1; label <= a.rank(); ++label) {
            const int xo = a.step(x, label, 1), yo = b.step(y, label, 1);
            if (xo >= 0 && yo >= 0)
                edges.push_back({here, label, intern(xo, yo)});
            // incoming edges only discover vertices; the edge itself is
            // emitted from its source
            const int xi = a.step(x, label, -1), yi = b.step(y, label, -1);
            if (xi >= 0 && yi >= 0)
                intern(xi, yi);
        }
    }
    return canonical(detail::core_of(a.rank(), static_cast<int>(pairs.size()), 0, edges));
}

/// One word per edge outside a breadth-first spanning tree at the basepoint.
inline std::vector<Word> free_basis(const StallingsGraph& g) {
    if (!g.is_folded())
        throw DomainError("free_basis: graph is not folded");
    const auto nv = static_cast<std::size_t>(g.vertex_count());
    std::vector<std::optional<Word>> prefix(nv);
    std::vector<char> tree_edge(g.edges().size(), 0);
    std::map<std::tuple<int, int, int>, std::size_t> edge_index;
    for (std::size_t k = 0; k < g.edges().size(); ++k) {
        const auto& e = g.edges()[k];
        edge_index[{e.src, e.label, e.dst}] = k;
    }
    std::deque<int> queue{g.basepoint()};
    prefix[static_cast<std::size_t>(g.basepoint())] = Word(g.rank());
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int label = 1; label <= g.rank(); ++label)
            for (int sign : {1, -1}) {
                const int w = g.step(v, label, sign);
                if (w < 0 || prefix[static_cast<std::size_t>(w)])
                    continue;
                prefix[static_cast<std::size_t>(w)] =
                    *prefix[static_cast<std::size_t>(v)] * Word::generator(g.rank(), label, sign);
                tree_edge[edge_index.at(sign > 0 ? std::tuple{v, label, w} : std::tuple{w, label, v})] = 1;
                queue.push_back(w);
            }
    }
    std::vector<Word> basis;
    for (std::size_t k = 0; k < g.edges().size(); ++k) {
        if (tree_edge[k])
            continue;
        const auto& e = g.edges()[k];
        const auto& ps = prefix[static_cast<std::size_t>(e.src)];
        const auto& pd = prefix[static_cast<std::size_t>(e.dst)];
        if (!ps || !pd)
            throw DomainError("free_basis: graph is not connected");
        basis.push_back(*ps * Word::generator(g.rank(), e.label) * pd->inverse());
    }
    return basis;
}

/// Deterministic DOT rendering; the basepoint is double-circled.
inline std::string export_dot(const StallingsGraph& g) {
    const StallingsGraph c = g.is_folded() && g.is_connected() ? canonical(g) : g;
    std::ostringstream os;
    os << "digraph stallings {\n";
    for (int v = 0; v < c.vertex_count(); ++v)
        os << "  " << v << (v == c.basepoint() ? " [shape=doublecircle];\n" : " [shape=circle];\n");
    for (const auto& e : c.edges())
        os << "  " << e.src << " -> " << e.dst << " [label=\"x" << e.label << "\"];\n";
    os << "}\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Named graphs

/// Generators of R_{n,rank} = ker(alpha_1 mod n):
/// x_1^i x_j x_1^{-i-1} (0 <= i <= n-2, 2 <= j <= rank) and x_1^{n-1} x_j.
inline std::vector<Word> rn_generators(std::int64_t n, int rank) {
    if (n < 1 || rank < 1)
        throw DomainError("rn_generators: need n >= 1 and rank >= 1");
    std::vector<Word> out;
    for (std::int64_t i = 0; i + 2 <= n; ++i)
        for (int j = 2; j <= rank; ++j)
            out.push_back(Word::generator(rank, 1, i) * Word::generator(rank, j) * Word::generator(rank, 1, -i - 1));
    for (int j = 1; j <= rank; ++j)
        out.push_back(Word::generator(rank, 1, n - 1) * Word::generator(rank, j));
    return out;
}

/// The n-cycle with every generator labelling each edge i -> i+1 mod n.
inline StallingsGraph rn_graph(std::int64_t n, int rank) {
    if (n < 1 || rank < 1)
        throw DomainError("rn_graph: need n >= 1 and rank >= 1");
    std::vector<Edge> edges;
    for (std::int64_t i = 0; i < n; ++i)
        for (int j = 1; j <= rank; ++j)
            edges.push_back({static_cast<int>(i), j, static_cast<int>((i + 1) % n)});
    return canonical(StallingsGraph(rank, static_cast<int>(n), 0, std::move(edges)));
}

/// Window |i| <= half_width of the bi-infinite line realizing R_{0,rank}.
/// Accepts exactly the words of ker(alpha_1) whose prefix sums stay in the
/// window, so every kernel word of length <= half_width.
inline StallingsGraph r0_window_graph(int rank, std::int64_t half_width) {
    if (half_width < 0 || rank < 1)
        throw DomainError("r0_window_graph: bad window");
    const auto nv = static_cast<int>(2 * half_width + 1);
    std::vector<Edge> edges;
    for (int v = 0; v + 1 < nv; ++v)
        for (int j = 1; j <= rank; ++j)
            edges.push_back({v, j, v + 1});
    return canonical(StallingsGraph(rank, nv, static_cast<int>(half_width), std::move(edges)));
}

inline std::vector<Word> power_generators(std::span<const std::int64_t> d) {
    const int rank = static_cast<int>(d.size());
    std::vector<Word> out;
    for (int i = 0; i < rank; ++i)
        out.push_back(Word::generator(rank, i + 1, d[static_cast<std::size_t>(i)]));
    return out;
}

/// Bouquet of subdivided loops, the i-th of length d_i labelled x_i.
inline StallingsGraph power_graph(std::span<const std::int64_t> d) {
    const int rank = static_cast<int>(d.size());
    int vertices = 1;
    std::vector<Edge> edges;
    for (int i = 0; i < rank; ++i) {
        const auto len = d[static_cast<std::size_t>(i)];
        if (len < 1)
            throw DomainError("power_graph: exponents must be positive");
        int cur = 0;
        for (std::int64_t k = 1; k <= len; ++k) {
            const int nxt = k == len ? 0 : vertices++;
            edges.push_back({cur, i + 1, nxt});
            cur = nxt;
        }
    }
    return canonical(StallingsGraph(rank, vertices, 0, std::move(edges)));
}

// phi: x_j -> x_j^{d_j}
inline Word phi(const CurveParams& p, const Word& w) {
    check_rank(p, w);
    Word out(w.rank());
    for (const auto& s : w.syllables())
        out = out * Word::generator(w.rank(), s.gen, s.exp * p.d(s.gen));
    return out;
}

struct PullbackVerdict {
    bool graph;  // phi(w) lies in the product graph's subgroup
    bool oracle; // direct alpha test
    bool agrees() const noexcept { return graph == oracle; }
};

/// ker(alpha) (resp. ker(alpha mod n)) as the phi-preimage of
/// R_{0,s-1} (resp. R_{n,s-1}) intersected with <x_i^{d_i}>.
class PullbackChecker {
public:
    PullbackChecker(CurveParams p, KernelMode mode) : p_(std::move(p)), mode_(mode) {
        const auto d = open_d();
        power_ = power_graph(d);
        if (mode_ == KernelMode::ModN)
            product_ = product_graph(rn_graph(p_.n(), p_.free_rank()), *power_);
    }

    PullbackVerdict check(const Word& w) const {
        const Word image = phi(p_, w);
        bool in_graph;
        bool oracle;
        if (mode_ == KernelMode::ModN) {
            in_graph = membership_graph(*product_, image);
            oracle = alpha_mod_n(p_, w) == 0;
        } else {
            in_graph = membership_graph(integral_product(image), image);
            oracle = alpha(p_, w) == 0;
        }
        return {in_graph, oracle};
    }

    const StallingsGraph& product() const {
        if (!product_)
            throw DomainError("PullbackChecker: integral mode has no fixed product graph");
        return *product_;
    }

private:
    std::vector<std::int64_t> open_d() const { return {p_.d().begin(), p_.d().end() - 1}; }

    // Product with a window of R_0 wide enough for every prefix of the word.
    // Widths are rounded up to powers of two and cached.
    const StallingsGraph& integral_product(const Word& image) const {
        std::int64_t sum = 0, reach = 1;
        for (const auto& s : image.syllables()) {
            const auto lo = std::min(sum, sum + s.exp), hi = std::max(sum, sum + s.exp);
            reach = std::max({reach, -lo, hi});
            sum += s.exp;
        }
        std::int64_t half = 1;
        while (half < reach)
            half *= 2;
        std::lock_guard lock(*cache_mutex_);
        auto it = windows_.find(half);
        if (it == windows_.end())
            it = windows_.emplace(half, product_graph(r0_window_graph(p_.free_rank(), half), *power_)).first;
        return it->second;
    }

    CurveParams p_;
    KernelMode mode_;
    std::optional<StallingsGraph> power_;
    std::optional<StallingsGraph> product_;
    mutable std::map<std::int64_t, StallingsGraph> windows_;
    std::shared_ptr<std::mutex> cache_mutex_ = std::make_shared<std::mutex>();
};

inline bool pullback_check(const CurveParams& p, const Word& w, KernelMode mode = KernelMode::ModN) {
    return PullbackChecker(p, mode).check(w).agrees();
}

} // namespace kummer
