#include "netleak/community.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace netleak {

std::vector<std::uint32_t> Partition::community_sizes() const {
    std::vector<std::uint32_t> sizes(n_communities, 0);
    for (std::uint32_t c : community_of) ++sizes[c];
    return sizes;
}

double modularity(const ProviderGraph& graph, std::span<const std::uint32_t> labels) {
    if (graph.node_count() == 0) throw std::invalid_argument("modularity undefined for empty graph");
    if (labels.size() != graph.node_count())
        throw std::invalid_argument("labeling does not cover all nodes");
    for (std::uint32_t label : labels)
        if (label == kNoCommunity) throw std::invalid_argument("unlabeled node in partition");

    const double two_m = 2.0 * static_cast<double>(graph.total_weight());
    if (two_m == 0.0) throw std::invalid_argument("modularity undefined for zero total edge weight");

    // remap arbitrary ids to dense slots
    std::uint32_t max_label = 0;
    for (std::uint32_t label : labels) max_label = std::max(max_label, label);
    std::vector<std::uint32_t> slot_of;
    std::unordered_map<std::uint32_t, std::uint32_t> slot_map;
    const bool dense = max_label < labels.size() * 4 + 16;
    std::uint32_t n_slots = 0;
    if (dense) {
        slot_of.assign(max_label + 1, kNoCommunity);
        for (std::uint32_t label : labels)
            if (slot_of[label] == kNoCommunity) slot_of[label] = n_slots++;
    } else {
        for (std::uint32_t label : labels)
            if (slot_map.emplace(label, n_slots).second) ++n_slots;
    }
    auto slot = [&](std::uint32_t label) { return dense ? slot_of[label] : slot_map.at(label); };

    std::vector<double> internal(n_slots, 0.0), ends(n_slots, 0.0);
    for (const auto& e : graph.edges()) {
        const std::uint32_t cu = slot(labels[e.u]);
        const std::uint32_t cv = slot(labels[e.v]);
        ends[cu] += e.weight;
        ends[cv] += e.weight;
        if (cu == cv) internal[cu] += e.weight;
    }

    double q = 0.0;
    for (std::uint32_t c = 0; c < n_slots; ++c) {
        const double e_cc = 2.0 * internal[c] / two_m;
        const double a_c = ends[c] / two_m;
        q += e_cc - a_c * a_c;
    }
    return q;
}

namespace {

struct Candidate {
    double dq;
    std::uint32_t a, b;        // community reps, a < b
    std::uint64_t va, vb;      // version stamps at push time

    // priority_queue keeps the "largest"; ties prefer the lexicographically
    // smallest pair so runs are reproducible
    bool operator<(const Candidate& other) const {
        if (dq != other.dq) return dq < other.dq;
        if (a != other.a) return a > other.a;
        return b > other.b;
    }
};

/// Canonical labels: dense ids ordered by descending community size,
/// ties by smallest member node index.
std::pair<std::vector<std::uint32_t>, std::uint32_t> canonicalize(
    std::span<const std::uint32_t> raw) {
    std::map<std::uint32_t, std::pair<std::uint32_t, std::uint32_t>> stats;  // id -> (size, min member)
    for (std::uint32_t i = 0; i < raw.size(); ++i) {
        auto [it, inserted] = stats.try_emplace(raw[i], 0u, i);
        ++it->second.first;
        it->second.second = std::min(it->second.second, i);
    }
    std::vector<std::pair<std::uint32_t, std::pair<std::uint32_t, std::uint32_t>>> order(stats.begin(),
                                                                                         stats.end());
    std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
        if (x.second.first != y.second.first) return x.second.first > y.second.first;
        return x.second.second < y.second.second;
    });
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    for (std::uint32_t rank = 0; rank < order.size(); ++rank) remap.emplace(order[rank].first, rank);
    std::vector<std::uint32_t> labels(raw.size());
    for (std::uint32_t i = 0; i < raw.size(); ++i) labels[i] = remap.at(raw[i]);
    return {std::move(labels), static_cast<std::uint32_t>(order.size())};
}

}  // namespace

std::vector<std::uint32_t> replay_merges(std::size_t n_nodes, std::span<const MergeStep> merge_log,
                                         std::size_t n_merges) {
    std::vector<std::uint32_t> parent(n_nodes);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    if (n_merges > merge_log.size()) throw std::invalid_argument("merge prefix out of range");
    for (std::size_t t = 0; t < n_merges; ++t) parent[merge_log[t].b] = merge_log[t].a;
    std::vector<std::uint32_t> labels(n_nodes);
    for (std::uint32_t i = 0; i < n_nodes; ++i) labels[i] = find(i);
    return labels;
}

Partition fast_greedy(const ProviderGraph& graph) {
    const std::size_t n = graph.node_count();
    if (n == 0) throw std::invalid_argument("fast_greedy requires a non-empty graph");

    Partition result;
    const std::uint64_t m = graph.total_weight();
    if (m == 0) {
        // zero-weight convention: every node its own community, Q := 0
        result.community_of.resize(n);
        std::iota(result.community_of.begin(), result.community_of.end(), 0u);
        result.n_communities = static_cast<std::uint32_t>(n);
        result.modularity = 0.0;
        return result;
    }

    const double two_m = 2.0 * static_cast<double>(m);
    std::vector<double> a_frac(n, 0.0);
    std::vector<std::map<std::uint32_t, double>> nbr(n);  // rep -> f_ij = w_ij / 2m
    for (const auto& e : graph.edges()) {
        const double f = static_cast<double>(e.weight) / two_m;
        nbr[e.u][e.v] += f;
        nbr[e.v][e.u] += f;
        a_frac[e.u] += static_cast<double>(e.weight) / two_m;
        a_frac[e.v] += static_cast<double>(e.weight) / two_m;
    }

    double q = 0.0;
    for (double a : a_frac) q -= a * a;

    std::vector<bool> alive(n, true);
    std::vector<std::uint64_t> version(n, 0);
    std::priority_queue<Candidate> heap;
    for (std::uint32_t u = 0; u < n; ++u)
        for (const auto& [v, f] : nbr[u])
            if (u < v) heap.push({2.0 * (f - a_frac[u] * a_frac[v]), u, v, 0, 0});

    std::vector<MergeStep> merge_log;
    std::vector<double> q_levels{q};  // q_levels[t] = Q after t merges

    while (!heap.empty()) {
        Candidate cand = heap.top();
        heap.pop();
        if (!alive[cand.a] || !alive[cand.b] || version[cand.a] != cand.va ||
            version[cand.b] != cand.vb)
            continue;

        const std::uint32_t a = cand.a, b = cand.b;
        q += cand.dq;
        merge_log.push_back({a, b, cand.dq});
        q_levels.push_back(q);

        // absorb b into a
        for (const auto& [k, f] : nbr[b]) {
            if (k == a) continue;
            nbr[a][k] += f;
            nbr[k][a] += f;
            nbr[k].erase(b);
        }
        nbr[a].erase(b);
        nbr[b].clear();
        alive[b] = false;
        a_frac[a] += a_frac[b];
        ++version[a];
        ++version[b];

        for (const auto& [k, f] : nbr[a]) {
            const double dq = 2.0 * (f - a_frac[a] * a_frac[k]);
            const std::uint32_t lo = std::min(a, k), hi = std::max(a, k);
            heap.push({dq, lo, hi, version[lo], version[hi]});
        }
    }

    // cut the dendrogram at the Q maximum; exact ties resolve to the later
    // (fewest communities) level
    std::size_t cut = 0;
    for (std::size_t level = 0; level < q_levels.size(); ++level)
        if (q_levels[level] >= q_levels[cut]) cut = level;

    auto raw = replay_merges(n, merge_log, cut);
    auto [labels, n_communities] = canonicalize(raw);
    result.community_of = std::move(labels);
    result.n_communities = n_communities;
    result.modularity = q_levels[cut];
    result.merge_log = std::move(merge_log);
    result.cut_index = static_cast<std::uint32_t>(cut);
    return result;
}

std::size_t PrunedPartition::excluded_provider_count() const {
    std::size_t total = 0;
    for (const auto& c : excluded) total += c.members.size();
    return total;
}

double PrunedPartition::excluded_mean_size() const {
    if (excluded.empty()) return 0.0;
    return static_cast<double>(excluded_provider_count()) / static_cast<double>(excluded.size());
}

std::vector<std::uint32_t> PrunedPartition::major_sizes() const {
    std::vector<std::uint32_t> sizes(n_major, 0);
    for (std::uint32_t c : major_of)
        if (c != kNoCommunity) ++sizes[c];
    return sizes;
}

PrunedPartition prune_small(const Partition& partition, std::uint32_t min_size) {
    if (min_size < 1) throw std::invalid_argument("min_size must be >= 1");

    std::map<std::uint32_t, std::vector<std::uint32_t>> members;
    for (std::uint32_t i = 0; i < partition.community_of.size(); ++i)
        members[partition.community_of[i]].push_back(i);

    struct MajorEntry {
        std::uint32_t original_id;
        std::uint32_t size;
        std::uint32_t min_member;
    };
    std::vector<MajorEntry> major_entries;
    PrunedPartition pruned;
    pruned.modularity = partition.modularity;
    for (const auto& [id, nodes] : members) {
        if (nodes.size() >= min_size) {
            major_entries.push_back(
                {id, static_cast<std::uint32_t>(nodes.size()), nodes.front()});
        } else {
            pruned.excluded.push_back({id, nodes});
        }
    }
    std::sort(major_entries.begin(), major_entries.end(), [](const MajorEntry& x, const MajorEntry& y) {
        if (x.size != y.size) return x.size > y.size;
        return x.min_member < y.min_member;
    });

    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    for (std::uint32_t rank = 0; rank < major_entries.size(); ++rank)
        remap.emplace(major_entries[rank].original_id, rank);

    pruned.major_of.assign(partition.community_of.size(), kNoCommunity);
    for (std::uint32_t i = 0; i < partition.community_of.size(); ++i) {
        auto it = remap.find(partition.community_of[i]);
        if (it != remap.end()) pruned.major_of[i] = it->second;
    }
    pruned.n_major = static_cast<std::uint32_t>(major_entries.size());
    return pruned;
}

double adjusted_rand_index(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    if (a.size() != b.size()) throw std::invalid_argument("labelings differ in length");
    const std::size_t n = a.size();
    if (n < 2) return 1.0;

    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> contingency;
    std::map<std::uint32_t, std::uint64_t> row_sums, col_sums;
    for (std::size_t i = 0; i < n; ++i) {
        ++contingency[{a[i], b[i]}];
        ++row_sums[a[i]];
        ++col_sums[b[i]];
    }
    auto choose2 = [](std::uint64_t x) { return static_cast<double>(x) * (x - 1) / 2.0; };

    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [_, count] : contingency) sum_ij += choose2(count);
    for (const auto& [_, count] : row_sums) sum_a += choose2(count);
    for (const auto& [_, count] : col_sums) sum_b += choose2(count);

    const double total_pairs = choose2(n);
    const double expected = sum_a * sum_b / total_pairs;
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;  // both partitions degenerate and identical
    return (sum_ij - expected) / (max_index - expected);
}

}  // namespace netleak
