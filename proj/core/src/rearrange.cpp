#include "entanglekit/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "entanglekit/partitions.hpp"
#include "entanglekit/rng.hpp"

namespace entanglekit {

namespace {

// Deterministic per-(level, block) seed derivation (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (a + 1) + 0xBF58476D1CE4E5B9ull * (b + 1);
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

double edge(const CorrelationGraph& g, std::size_t a, std::size_t b) {
    return g.weights(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
}

double cut_between(const CorrelationGraph& g, const std::vector<std::size_t>& a,
                   const std::vector<std::size_t>& b) {
    double total = 0.0;
    for (std::size_t va : a)
        for (std::size_t vb : b)
            total += edge(g, va, vb);
    return total;
}

double total_cut(const CorrelationGraph& g,
                 const std::vector<std::vector<std::size_t>>& parts) {
    double total = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i)
        for (std::size_t j = i + 1; j < parts.size(); ++j)
            total += cut_between(g, parts[i], parts[j]);
    return total;
}

void validate_vertices(const CorrelationGraph& g, const std::vector<std::size_t>& vertices) {
    std::vector<bool> seen(g.size(), false);
    for (std::size_t v : vertices) {
        if (v >= g.size())
            throw partition_error("vertex index out of range");
        if (seen[v])
            throw partition_error("duplicate vertex in working set");
        seen[v] = true;
    }
}

// One Kernighan-Lin pass over the bipartition (a | b) of the subgraph they
// induce.  Applies the best prefix of tentative swaps; returns the cut gain
// (>= 0).  Ties between candidate swaps break toward the smallest pair of
// list positions, so the search is deterministic.
double kl_pass(const CorrelationGraph& g, std::vector<std::size_t>& a,
               std::vector<std::size_t>& b) {
    const std::size_t k = a.size();
    std::vector<std::size_t> av = a, bv = b;
    // D[v] = external - internal degree within the induced subgraph.
    auto d_of = [&](std::size_t v, bool in_a) {
        double internal = 0.0, external = 0.0;
        for (std::size_t u : av)
            if (u != v)
                (in_a ? internal : external) += edge(g, v, u);
        for (std::size_t u : bv)
            if (u != v)
                (in_a ? external : internal) += edge(g, v, u);
        return external - internal;
    };
    std::vector<double> da(k), db(k);
    for (std::size_t i = 0; i < k; ++i) {
        da[i] = d_of(av[i], true);
        db[i] = d_of(bv[i], false);
    }
    std::vector<bool> locked_a(k, false), locked_b(k, false);
    std::vector<std::pair<std::size_t, std::size_t>> swaps;
    std::vector<double> gains;
    for (std::size_t step = 0; step < k; ++step) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        bool found = false;
        for (std::size_t i = 0; i < k; ++i) {
            if (locked_a[i])
                continue;
            for (std::size_t j = 0; j < k; ++j) {
                if (locked_b[j])
                    continue;
                const double gain = da[i] + db[j] - 2.0 * edge(g, av[i], bv[j]);
                if (gain > best) {
                    best = gain;
                    bi = i;
                    bj = j;
                    found = true;
                }
            }
        }
        if (!found)
            break;
        locked_a[bi] = locked_b[bj] = true;
        swaps.emplace_back(bi, bj);
        gains.push_back(best);
        // update D values as if av[bi] and bv[bj] had swapped sides
        for (std::size_t i = 0; i < k; ++i) {
            if (!locked_a[i])
                da[i] += 2.0 * edge(g, av[i], av[bi]) - 2.0 * edge(g, av[i], bv[bj]);
            if (!locked_b[i])
                db[i] += 2.0 * edge(g, bv[i], bv[bj]) - 2.0 * edge(g, bv[i], av[bi]);
        }
    }
    // best strictly-positive prefix (first maximum)
    double cum = 0.0, best_cum = 0.0;
    std::size_t best_len = 0;
    for (std::size_t t = 0; t < gains.size(); ++t) {
        cum += gains[t];
        if (cum > best_cum + 1e-15) {
            best_cum = cum;
            best_len = t + 1;
        }
    }
    if (best_len == 0)
        return 0.0;
    for (std::size_t t = 0; t < best_len; ++t)
        std::swap(a[swaps[t].first], b[swaps[t].second]);
    return best_cum;
}

// Full KL refinement: passes until a pass yields no improvement.
void kl_refine(const CorrelationGraph& g, std::vector<std::size_t>& a,
               std::vector<std::size_t>& b, std::vector<double>* trace) {
    for (int pass = 0; pass < 64; ++pass) {
        const double gain = kl_pass(g, a, b);
        if (trace)
            trace->push_back(cut_between(g, a, b));
        if (gain <= 0.0)
            break;
    }
}

void order_parts(std::vector<std::vector<std::size_t>>& parts) {
    for (auto& p : parts)
        std::sort(p.begin(), p.end());
    std::sort(parts.begin(), parts.end(),
              [](const auto& x, const auto& y) { return x.front() < y.front(); });
}

CutSolution finish_solution(const CorrelationGraph& g, CutSolution sol) {
    order_parts(sol.parts);
    sol.cut_weight = total_cut(g, sol.parts);
    double se = 0.0;
    for (const auto& p : sol.parts)
        se += surrogate_entanglement(g, p);
    sol.objective = se / static_cast<double>(sol.parts.size());
    return sol;
}

// Exhaustive minimum balanced bipartition; vertices[0] stays in the first
// part so each unordered split is scored once.  First optimum in
// lexicographic enumeration order wins.
CutSolution exact_bipartition(const CorrelationGraph& g,
                              const std::vector<std::size_t>& vertices) {
    const std::size_t n = vertices.size();
    const std::size_t half = n / 2;
    std::vector<std::size_t> pick;
    std::vector<std::size_t> best_pick;
    double best_cut = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t)> rec = [&](std::size_t next) {
        if (pick.size() == half - 1) {
            std::vector<std::size_t> a{vertices[0]}, b;
            std::vector<bool> used(n, false);
            used[0] = true;
            for (std::size_t idx : pick) {
                a.push_back(vertices[idx]);
                used[idx] = true;
            }
            for (std::size_t i = 1; i < n; ++i)
                if (!used[i])
                    b.push_back(vertices[i]);
            const double c = cut_between(g, a, b);
            if (c < best_cut - 1e-15) {
                best_cut = c;
                best_pick = pick;
            }
            return;
        }
        for (std::size_t i = next; i < n; ++i) {
            pick.push_back(i);
            rec(i + 1);
            pick.pop_back();
        }
    };
    rec(1);

    CutSolution sol;
    std::vector<std::size_t> a{vertices[0]}, b;
    std::vector<bool> used(n, false);
    used[0] = true;
    for (std::size_t idx : best_pick) {
        a.push_back(vertices[idx]);
        used[idx] = true;
    }
    for (std::size_t i = 1; i < n; ++i)
        if (!used[i])
            b.push_back(vertices[i]);
    sol.parts = {std::move(a), std::move(b)};
    sol.exact = true;
    return finish_solution(g, std::move(sol));
}

// Exhaustive minimum partition into q equal parts; parts are anchored by
// their smallest member so each unordered partition appears once.
CutSolution exact_equal_partition(const CorrelationGraph& g,
                                  const std::vector<std::size_t>& vertices, std::size_t q) {
    const std::size_t n = vertices.size();
    const std::size_t part_size = n / q;
    std::vector<std::size_t> assign(n, std::size_t(-1));
    std::vector<std::size_t> fill(q, 0);
    std::vector<std::size_t> best_assign;
    double best_cut = std::numeric_limits<double>::infinity();

    // Incremental cut: when v joins group gr, edges to vertices already in
    // other groups become cut edges.  Weights may be negative, so every
    // complete assignment is scored (no pruning).
    std::function<void(std::size_t, std::size_t, double)> rec = [&](std::size_t v,
                                                                    std::size_t open,
                                                                    double cut) {
        if (v == n) {
            if (cut < best_cut - 1e-15) {
                best_cut = cut;
                best_assign = assign;
            }
            return;
        }
        for (std::size_t gr = 0; gr < std::min(open + 1, q); ++gr) {
            if (fill[gr] == part_size)
                continue;
            double delta = 0.0;
            for (std::size_t u = 0; u < v; ++u)
                if (assign[u] != gr)
                    delta += edge(g, vertices[v], vertices[u]);
            assign[v] = gr;
            ++fill[gr];
            rec(v + 1, std::max(open, gr + 1), cut + delta);
            --fill[gr];
            assign[v] = std::size_t(-1);
        }
    };
    rec(0, 0, 0.0);

    CutSolution sol;
    sol.parts.assign(q, {});
    for (std::size_t v = 0; v < n; ++v)
        sol.parts[best_assign[v]].push_back(vertices[v]);
    sol.exact = true;
    return finish_solution(g, std::move(sol));
}

} // namespace

CutSolution min_balanced_cut(const CorrelationGraph& graph,
                             std::vector<std::size_t> vertices, std::uint64_t seed,
                             std::size_t restarts, bool exact) {
    validate_vertices(graph, vertices);
    const std::size_t n = vertices.size();
    if (n < 2 || n % 2 != 0)
        throw argument_error("balanced bipartition needs an even vertex count >= 2");
    std::sort(vertices.begin(), vertices.end());

    if (exact) {
        if (n > kExactCutLimit)
            throw argument_error("exhaustive mode supports at most " +
                                 std::to_string(kExactCutLimit) + " vertices");
        return exact_bipartition(graph, vertices);
    }
    if (restarts == 0)
        throw argument_error("at least one restart is required");

    // A 2-vertex block has one split; keep the smaller index first.
    if (n == 2) {
        CutSolution sol;
        sol.parts = {{vertices[0]}, {vertices[1]}};
        sol.restarts_used = 0;
        return finish_solution(graph, std::move(sol));
    }

    CutSolution best;
    double best_cut = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < restarts; ++r) {
        rng_engine gen(mix_seed(seed, 0x5eedULL, r));
        std::vector<std::size_t> order = vertices;
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[uniform_index(gen, i)]);
        std::vector<std::size_t> a(order.begin(), order.begin() + n / 2);
        std::vector<std::size_t> b(order.begin() + n / 2, order.end());
        std::vector<double> trace{cut_between(graph, a, b)};
        kl_refine(graph, a, b, &trace);
        const double cut = cut_between(graph, a, b);
        if (cut < best_cut - 1e-15) {
            best_cut = cut;
            best.parts = {a, b};
            best.improvement = trace;
            best.restarts_used = r + 1;
        }
    }
    best.restarts_used = restarts;
    return finish_solution(graph, std::move(best));
}

CutSolution min_balanced_pow2_cut(const CorrelationGraph& graph,
                                  std::vector<std::size_t> vertices,
                                  std::size_t spatial_dim, std::uint64_t seed,
                                  std::size_t restarts, bool exact) {
    validate_vertices(graph, vertices);
    if (spatial_dim < 1 || spatial_dim > 16)
        throw argument_error("spatial dimension out of range");
    const std::size_t q = std::size_t{1} << spatial_dim;
    const std::size_t n = vertices.size();
    if (n < q || n % q != 0)
        throw argument_error("vertex count must be a positive multiple of the part count");
    std::sort(vertices.begin(), vertices.end());

    if (spatial_dim == 1)
        return min_balanced_cut(graph, std::move(vertices), seed, restarts, exact);

    if (exact) {
        if (n > kExactPow2CutLimit)
            throw argument_error("exhaustive mode supports at most " +
                                 std::to_string(kExactPow2CutLimit) + " vertices");
        return exact_equal_partition(graph, vertices, q);
    }
    if (restarts == 0)
        throw argument_error("at least one restart is required");

    // Restart 0 seeds the parts by recursive bisection; later restarts start
    // from random equal chunks instead (bisection converges to the same split
    // from almost any start, so rerunning it adds no diversity).  Pairwise
    // sweeps then refine each start, and the best final cut wins.  A swap
    // inside a pair leaves edges into the other parts crossing either way, so
    // minimizing each pair's cut also minimizes the global objective.
    CutSolution best;
    double best_cut = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < restarts; ++r) {
        const std::uint64_t restart_seed = mix_seed(seed, 0xd1ce, r);
        std::vector<std::vector<std::size_t>> parts;
        if (r == 0) {
            parts.assign(1, vertices);
            std::size_t depth = 0;
            while (parts.size() < q) {
                std::vector<std::vector<std::size_t>> next;
                for (std::size_t i = 0; i < parts.size(); ++i) {
                    auto sol = min_balanced_cut(graph, parts[i],
                                                mix_seed(restart_seed, depth, i),
                                                restarts, false);
                    next.push_back(std::move(sol.parts[0]));
                    next.push_back(std::move(sol.parts[1]));
                }
                parts = std::move(next);
                ++depth;
            }
        } else {
            std::vector<std::size_t> order = vertices;
            rng_engine gen(restart_seed);
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[uniform_index(gen, i)]);
            const std::size_t chunk = n / q;
            for (std::size_t g = 0; g < q; ++g)
                parts.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(g * chunk),
                                   order.begin() +
                                       static_cast<std::ptrdiff_t>((g + 1) * chunk));
        }
        for (int sweep = 0; sweep < 16; ++sweep) {
            bool improved = false;
            for (std::size_t i = 0; i < parts.size(); ++i) {
                for (std::size_t j = i + 1; j < parts.size(); ++j) {
                    const double before = cut_between(graph, parts[i], parts[j]);
                    std::vector<std::size_t> a = parts[i], b = parts[j];
                    kl_refine(graph, a, b, nullptr);
                    const double after = cut_between(graph, a, b);
                    if (after < before - 1e-15) {
                        parts[i] = std::move(a);
                        parts[j] = std::move(b);
                        improved = true;
                    }
                }
            }
            if (!improved)
                break;
        }
        const double cut = total_cut(graph, parts);
        if (cut < best_cut - 1e-15) {
            best_cut = cut;
            best.parts = std::move(parts);
        }
    }
    best.restarts_used = restarts;
    return finish_solution(graph, std::move(best));
}

std::vector<std::size_t> FeaturePermutation::inverse() const {
    std::vector<std::size_t> inv(map.size(), std::size_t(-1));
    for (std::size_t f = 0; f < map.size(); ++f) {
        if (map[f] >= map.size() || inv[map[f]] != std::size_t(-1))
            throw argument_error("permutation is not a bijection");
        inv[map[f]] = f;
    }
    return inv;
}

FeaturePermutation rearrange_1d(const Dataset& ds, std::uint64_t seed,
                                std::size_t restarts, bool exact) {
    ds.validate();
    if (ds.spatial_dim != 1)
        throw precondition_error("one-dimensional rearrangement expects spatial_dim == 1");
    const std::size_t n = ds.n_features;
    if (!is_power_of_two(n) || n < 2)
        throw precondition_error("rearrangement needs a power-of-two feature count >= 2");
    const std::size_t levels = log2_exact(n);
    const auto graph = build_correlation_graph(ds);

    FeaturePermutation perm;
    perm.spatial_dim = 1;
    perm.n = n;
    perm.map.assign(n, 0);

    // Split blocks level by level; block order within a level follows the
    // target position order, so positions can be assigned at the end.
    std::vector<std::vector<std::size_t>> blocks{std::vector<std::size_t>(n)};
    std::iota(blocks[0].begin(), blocks[0].end(), std::size_t{0});
    for (std::size_t l = 0; l < levels; ++l) {
        std::vector<std::vector<std::size_t>> next;
        for (std::size_t bidx = 0; bidx < blocks.size(); ++bidx) {
            auto sol = min_balanced_cut(graph, blocks[bidx], mix_seed(seed, l, bidx),
                                        restarts, exact);
            LevelCut record;
            record.level = l;
            record.block = bidx;
            record.cut_weight = sol.cut_weight;
            record.parts = sol.parts;
            perm.provenance.push_back(std::move(record));
            next.push_back(std::move(sol.parts[0]));
            next.push_back(std::move(sol.parts[1]));
        }
        blocks = std::move(next);
    }
    for (std::size_t pos = 0; pos < blocks.size(); ++pos)
        perm.map[blocks[pos][0]] = pos;
    return perm;
}

FeaturePermutation rearrange_pdim(const Dataset& ds, std::size_t spatial_dim,
                                  std::uint64_t seed, std::size_t restarts, bool exact) {
    ds.validate();
    if (spatial_dim < 2)
        throw argument_error("use the one-dimensional variant for P == 1");
    if (ds.spatial_dim != 1 && ds.spatial_dim != spatial_dim)
        throw precondition_error("dataset spatial dimension conflicts with the request");
    Dataset grid = ds;
    grid.spatial_dim = spatial_dim;
    const std::size_t side = grid.side(); // throws if n_features is not side^P
    if (!is_power_of_two(side) || side < 2)
        throw precondition_error("grid side must be a power of two >= 2");
    const std::size_t levels = log2_exact(side);
    const std::size_t q = std::size_t{1} << spatial_dim;
    const auto graph = build_correlation_graph(grid);

    FeaturePermutation perm;
    perm.spatial_dim = spatial_dim;
    perm.n = side;
    perm.map.assign(grid.n_features, 0);

    // Blocks are kept in row-major order of their target block coordinate;
    // each split's parts (ordered by smallest member) are handed to the 2^P
    // child offsets in row-major order.
    std::vector<std::vector<std::size_t>> blocks{std::vector<std::size_t>(grid.n_features)};
    std::iota(blocks[0].begin(), blocks[0].end(), std::size_t{0});
    std::vector<std::vector<std::size_t>> coords{std::vector<std::size_t>(spatial_dim, 0)};
    for (std::size_t l = 0; l < levels; ++l) {
        std::vector<std::vector<std::size_t>> next_blocks;
        std::vector<std::vector<std::size_t>> next_coords;
        for (std::size_t bidx = 0; bidx < blocks.size(); ++bidx) {
            auto sol = min_balanced_pow2_cut(graph, blocks[bidx], spatial_dim,
                                             mix_seed(seed, l, bidx), restarts, exact);
            LevelCut record;
            record.level = l;
            record.block = bidx;
            record.cut_weight = sol.cut_weight;
            record.parts = sol.parts;
            perm.provenance.push_back(std::move(record));
            for (std::size_t child = 0; child < q; ++child) {
                std::vector<std::size_t> child_coord(spatial_dim);
                for (std::size_t p = 0; p < spatial_dim; ++p)
                    child_coord[p] = coords[bidx][p] * 2 +
                                     ((child >> (spatial_dim - 1 - p)) & 1u);
                next_blocks.push_back(std::move(sol.parts[child]));
                next_coords.push_back(std::move(child_coord));
            }
        }
        blocks = std::move(next_blocks);
        coords = std::move(next_coords);
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        std::size_t flat = 0;
        for (std::size_t p = 0; p < spatial_dim; ++p)
            flat = flat * side + coords[b][p];
        perm.map[blocks[b][0]] = flat;
    }
    return perm;
}

Dataset apply_permutation(const Dataset& ds, const FeaturePermutation& perm) {
    ds.validate();
    if (perm.size() != ds.n_features)
        throw shape_error("permutation length does not match the feature count");
    if (perm.spatial_dim != ds.spatial_dim && !(perm.spatial_dim > 1 && ds.spatial_dim == 1))
        throw shape_error("permutation spatial dimension does not match the dataset");
    (void)perm.inverse(); // bijection check

    Dataset out = ds;
    out.spatial_dim = std::max(ds.spatial_dim, perm.spatial_dim);
    const std::size_t m_count = ds.instance_count();
    for (std::size_t m = 0; m < m_count; ++m)
        for (std::size_t f = 0; f < ds.n_features; ++f)
            for (std::size_t d = 0; d < ds.feature_dim; ++d)
                out.value(m, perm.map[f], d) = ds.value(m, f, d);
    return out;
}

Dataset random_swaps(const Dataset& ds, std::size_t k, std::uint64_t seed) {
    ds.validate();
    if (ds.n_features < 2)
        throw precondition_error("swapping needs at least two features");
    rng_engine gen(seed);
    std::vector<std::size_t> positions(ds.n_features);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    for (std::size_t s = 0; s < k; ++s) {
        const std::size_t i = uniform_index(gen, ds.n_features);
        std::size_t j = uniform_index(gen, ds.n_features - 1);
        if (j >= i)
            ++j;
        std::swap(positions[i], positions[j]);
    }
    FeaturePermutation perm;
    perm.spatial_dim = ds.spatial_dim;
    perm.n = ds.spatial_dim > 1 ? ds.side() : ds.n_features;
    // positions[p] = source feature now at position p  =>  map[source] = p.
    perm.map.assign(ds.n_features, 0);
    for (std::size_t p = 0; p < ds.n_features; ++p)
        perm.map[positions[p]] = p;
    return apply_permutation(ds, perm);
}

} // namespace entanglekit
