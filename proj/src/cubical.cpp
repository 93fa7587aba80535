#include "topoprint/cubical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace topo {

// The superlevel-set barcode is computed by negating the image and running
// standard sublevel-set persistence of the vertex construction: a cube's
// (negated) filtration value is the max over its vertices. Dimension 0 uses
// union-find with the elder rule; dimension 1 reduces the square-boundary
// columns (each square kills the edge at its reduced pivot). Births and
// deaths are negated back at the end. Zero-length bars are dropped.
//
// Tie-break between cells of equal value: dimension ascending, then row-major
// position on the (2R-1)x(2C-1) cell grid (vertices at even/even
// coordinates, edges between, squares at odd/odd).

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct EdgeCell {
    double value;
    int64_t index; // cell-grid row-major position
    int u, v;      // endpoint vertex ids
};

struct SquareCell {
    double value;
    int64_t index;
    int e[4]; // boundary edge ids
};

// Union-find over vertices tracking each component's elder (the creation
// vertex with the smallest (value, index) key).
struct ComponentForest {
    std::vector<int> parent;
    std::vector<int> rank_;
    std::vector<int> elder;

    explicit ComponentForest(int n) : parent(size_t(n)), rank_(size_t(n), 0), elder(size_t(n)) {
        std::iota(parent.begin(), parent.end(), 0);
        std::iota(elder.begin(), elder.end(), 0);
    }
    int find(int x) {
        while (parent[size_t(x)] != x) {
            parent[size_t(x)] = parent[size_t(parent[size_t(x)])];
            x = parent[size_t(x)];
        }
        return x;
    }
    int link(int a, int b, int surviving_elder) {
        if (rank_[size_t(a)] < rank_[size_t(b)]) std::swap(a, b);
        parent[size_t(b)] = a;
        if (rank_[size_t(a)] == rank_[size_t(b)]) ++rank_[size_t(a)];
        elder[size_t(a)] = surviving_elder;
        return a;
    }
};

} // namespace

Barcode upper_star_persistence(const IntensityImage& img) {
    if (img.rows < 1 || img.cols < 1 || img.data.empty())
        throw std::invalid_argument("upper_star_persistence: image must be at least 1x1");
    for (double v : img.data)
        if (!std::isfinite(v))
            throw std::invalid_argument("upper_star_persistence: non-finite pixel");

    const int R = img.rows, C = img.cols;
    const int n_vertices = R * C;
    const int64_t grid_cols = 2 * int64_t(C) - 1;

    std::vector<double> g(img.data.size());
    for (size_t i = 0; i < g.size(); ++i) g[i] = -img.data[i];

    auto vertex_key_less = [&](int a, int b) {
        if (g[size_t(a)] != g[size_t(b)]) return g[size_t(a)] < g[size_t(b)];
        int64_t ia = (2 * int64_t(a / C)) * grid_cols + 2 * int64_t(a % C);
        int64_t ib = (2 * int64_t(b / C)) * grid_cols + 2 * int64_t(b % C);
        return ia < ib;
    };

    // Edges: horizontal ones first, then vertical, ids are positions below.
    std::vector<EdgeCell> edges;
    edges.reserve(size_t(R) * (C - 1) + size_t(R - 1) * C);
    for (int r = 0; r < R; ++r)
        for (int c = 0; c + 1 < C; ++c) {
            int u = r * C + c, v = r * C + c + 1;
            edges.push_back({std::max(g[size_t(u)], g[size_t(v)]),
                             (2 * int64_t(r)) * grid_cols + 2 * int64_t(c) + 1, u, v});
        }
    const int n_h_edges = int(edges.size());
    for (int r = 0; r + 1 < R; ++r)
        for (int c = 0; c < C; ++c) {
            int u = r * C + c, v = (r + 1) * C + c;
            edges.push_back({std::max(g[size_t(u)], g[size_t(v)]),
                             (2 * int64_t(r) + 1) * grid_cols + 2 * int64_t(c), u, v});
        }

    std::vector<int> edge_order(edges.size());
    std::iota(edge_order.begin(), edge_order.end(), 0);
    std::sort(edge_order.begin(), edge_order.end(), [&](int a, int b) {
        if (edges[size_t(a)].value != edges[size_t(b)].value)
            return edges[size_t(a)].value < edges[size_t(b)].value;
        return edges[size_t(a)].index < edges[size_t(b)].index;
    });
    std::vector<int> edge_rank(edges.size());
    for (size_t pos = 0; pos < edge_order.size(); ++pos)
        edge_rank[size_t(edge_order[pos])] = int(pos);

    Barcode bc;

    // Dimension 0: sweep edges, merge components, younger elder dies.
    ComponentForest forest(n_vertices);
    for (int eid : edge_order) {
        const EdgeCell& e = edges[size_t(eid)];
        int ra = forest.find(e.u), rb = forest.find(e.v);
        if (ra == rb) continue;
        int ea = forest.elder[size_t(ra)], eb = forest.elder[size_t(rb)];
        int survivor = vertex_key_less(ea, eb) ? ea : eb;
        int dying = survivor == ea ? eb : ea;
        if (g[size_t(dying)] != e.value)
            bc.dim0.push_back({-g[size_t(dying)], -e.value});
        forest.link(ra, rb, survivor);
    }
    std::vector<bool> seen_root(size_t(n_vertices), false);
    for (int v = 0; v < n_vertices; ++v) {
        int r = forest.find(v);
        if (!seen_root[size_t(r)]) {
            seen_root[size_t(r)] = true;
            bc.dim0.push_back({-g[size_t(forest.elder[size_t(r)])], -kInf});
        }
    }

    // Dimension 1: reduce square boundaries over edge ranks.
    std::vector<SquareCell> squares;
    squares.reserve(size_t(std::max(0, R - 1)) * size_t(std::max(0, C - 1)));
    for (int r = 0; r + 1 < R; ++r)
        for (int c = 0; c + 1 < C; ++c) {
            int vs[4] = {r * C + c, r * C + c + 1, (r + 1) * C + c, (r + 1) * C + c + 1};
            double val = g[size_t(vs[0])];
            for (int i = 1; i < 4; ++i) val = std::max(val, g[size_t(vs[i])]);
            SquareCell s;
            s.value = val;
            s.index = (2 * int64_t(r) + 1) * grid_cols + 2 * int64_t(c) + 1;
            s.e[0] = r * (C - 1) + c;                   // top
            s.e[1] = (r + 1) * (C - 1) + c;             // bottom
            s.e[2] = n_h_edges + r * C + c;             // left
            s.e[3] = n_h_edges + r * C + c + 1;         // right
            squares.push_back(s);
        }

    std::vector<int> square_order(squares.size());
    std::iota(square_order.begin(), square_order.end(), 0);
    std::sort(square_order.begin(), square_order.end(), [&](int a, int b) {
        if (squares[size_t(a)].value != squares[size_t(b)].value)
            return squares[size_t(a)].value < squares[size_t(b)].value;
        return squares[size_t(a)].index < squares[size_t(b)].index;
    });

    std::vector<std::vector<int>> reduced(squares.size());
    std::vector<int> pivot_owner(edges.size(), -1);
    std::vector<int> merged;
    for (size_t si = 0; si < square_order.size(); ++si) {
        const SquareCell& s = squares[size_t(square_order[si])];
        std::vector<int> col = {edge_rank[size_t(s.e[0])], edge_rank[size_t(s.e[1])],
                                edge_rank[size_t(s.e[2])], edge_rank[size_t(s.e[3])]};
        std::sort(col.begin(), col.end());
        while (!col.empty()) {
            int low = col.back();
            int owner = pivot_owner[size_t(low)];
            if (owner < 0) {
                pivot_owner[size_t(low)] = int(si);
                const EdgeCell& e = edges[size_t(edge_order[size_t(low)])];
                if (e.value != s.value) bc.dim1.push_back({-e.value, -s.value});
                break;
            }
            // col ^= reduced[owner] (symmetric difference of sorted lists)
            const std::vector<int>& other = reduced[size_t(owner)];
            merged.clear();
            std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(),
                                          std::back_inserter(merged));
            col.swap(merged);
        }
        if (col.empty())
            throw std::logic_error("upper_star_persistence: degenerate square boundary");
        reduced[size_t(si)] = std::move(col);
    }

    return bc;
}

BettiCurve betti_curve(const Barcode& bc, int dim, double lo, double hi, int resolution) {
    if (dim != 0 && dim != 1) throw std::invalid_argument("betti_curve: dim must be 0 or 1");
    if (!(lo < hi)) throw std::invalid_argument("betti_curve: need lo < hi");
    if (resolution < 2) throw std::invalid_argument("betti_curve: resolution must be >= 2");

    const std::vector<Bar>& bars = dim == 0 ? bc.dim0 : bc.dim1;
    BettiCurve curve;
    curve.lo = lo;
    curve.hi = hi;
    curve.samples.assign(size_t(resolution), 0);
    const double step = (hi - lo) / resolution;
    for (const Bar& bar : bars) {
        for (int r = 0; r < resolution; ++r) {
            const double x = lo + (r + 0.5) * step;
            if (bar.death < x && x <= bar.birth) ++curve.samples[size_t(r)];
        }
    }
    return curve;
}

double betti_l1(const BettiCurve& a, const BettiCurve& b) {
    if (a.lo != b.lo || a.hi != b.hi || a.samples.size() != b.samples.size())
        throw std::invalid_argument("betti_l1: mismatched grids");
    if (a.samples.empty()) throw std::invalid_argument("betti_l1: empty curves");
    double acc = 0.0;
    for (size_t i = 0; i < a.samples.size(); ++i)
        acc += std::abs(double(a.samples[i]) - double(b.samples[i]));
    return (a.hi - a.lo) / double(a.samples.size()) * acc;
}

} // namespace topo
