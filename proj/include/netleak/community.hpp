#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "netleak/graph.hpp"

namespace netleak {

inline constexpr std::uint32_t kNoCommunity = UINT32_MAX;

struct MergeStep {
    std::uint32_t a = 0;  // surviving community (a < b at merge time)
    std::uint32_t b = 0;  // absorbed community
    double delta_q = 0.0;
};

/// Community labeling of every graph node. Ids are dense 0..k-1,
/// relabeled by descending community size.
struct Partition {
    std::vector<std::uint32_t> community_of;  // node index -> community id
    double modularity = 0.0;
    std::uint32_t n_communities = 0;
    std::vector<MergeStep> merge_log;  // full agglomeration, incl. past the cut
    std::uint32_t cut_index = 0;       // merges applied at the returned level

    std::vector<std::uint32_t> community_sizes() const;
};

/// Weighted modularity Q = sum_c (e_cc - a_c^2) for an arbitrary labeling.
/// Labels must cover every node; ids need not be dense. Throws on an empty
/// graph, zero total weight, or an incomplete labeling.
double modularity(const ProviderGraph& graph, std::span<const std::uint32_t> labels);

/// Agglomerative modularity maximization: start from singletons, greedily
/// merge the adjacent community pair with the largest delta-Q (ties broken
/// by smallest (min id, max id)), then cut the dendrogram at the Q-maximal
/// level, taking the fewest-communities level on exact ties.
///
/// A graph with zero total edge weight yields all singletons with Q = 0 by
/// convention.
Partition fast_greedy(const ProviderGraph& graph);

/// Labels produced by replaying the first `n_merges` entries of the merge
/// log from singletons (community ids dense in first-touch order).
std::vector<std::uint32_t> replay_merges(std::size_t n_nodes,
                                         std::span<const MergeStep> merge_log,
                                         std::size_t n_merges);

struct ExcludedCommunity {
    std::uint32_t original_id = 0;
    std::vector<std::uint32_t> members;  // node indices
};

struct PrunedPartition {
    /// node index -> major community id (dense, by descending size),
    /// or kNoCommunity for members of excluded communities.
    std::vector<std::uint32_t> major_of;
    std::uint32_t n_major = 0;
    double modularity = 0.0;  // of the unpruned partition
    std::vector<ExcludedCommunity> excluded;

    std::size_t excluded_provider_count() const;
    double excluded_mean_size() const;
    std::vector<std::uint32_t> major_sizes() const;
};

/// Moves communities smaller than min_size to the excluded list and
/// relabels the rest densely by descending size.
PrunedPartition prune_small(const Partition& partition, std::uint32_t min_size = 50);

/// Adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

}  // namespace netleak
