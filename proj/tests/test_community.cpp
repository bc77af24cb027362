#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "netleak/claims.hpp"
#include "netleak/community.hpp"
#include "netleak/synth.hpp"
#include "test_util.hpp"

#include <sstream>

using namespace netleak;
using testutil::make_graph;

namespace {

ProviderGraph two_triangles() {
    return make_graph(6, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}});
}

ProviderGraph bridged_triangles() {
    return make_graph(6, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}, {2, 3, 1}});
}

}  // namespace

TEST_CASE("one community gives Q = 0") {
    auto g = bridged_triangles();
    std::vector<std::uint32_t> labels(6, 0);
    CHECK(modularity(g, labels) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("two disjoint triangles partitioned by triangle give Q = 0.5") {
    auto g = two_triangles();
    std::vector<std::uint32_t> labels{0, 0, 0, 1, 1, 1};
    CHECK(modularity(g, labels) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("two disjoint triangles under all-singleton labels give Q = -1/6") {
    auto g = two_triangles();
    std::vector<std::uint32_t> labels{0, 1, 2, 3, 4, 5};
    CHECK(modularity(g, labels) == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("modularity is invariant under community relabeling") {
    std::mt19937_64 rng(3);
    auto g = testutil::random_connected_graph(rng, 9, 0.4, 5);
    std::vector<std::uint32_t> labels{0, 1, 0, 2, 1, 2, 0, 1, 2};
    const double q = modularity(g, labels);
    std::vector<std::uint32_t> renamed(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) renamed[i] = 700 + 13 * labels[i];
    CHECK(modularity(g, renamed) == doctest::Approx(q).epsilon(1e-15));
}

TEST_CASE("modularity error conditions") {
    auto g = two_triangles();
    std::vector<std::uint32_t> short_labels{0, 0, 0};
    CHECK_THROWS_AS(modularity(g, short_labels), std::invalid_argument);
    std::vector<std::uint32_t> with_hole{0, 0, 0, 1, 1, kNoCommunity};
    CHECK_THROWS_AS(modularity(g, with_hole), std::invalid_argument);

    auto empty = make_graph(0, {});
    std::vector<std::uint32_t> none;
    CHECK_THROWS_AS(modularity(empty, none), std::invalid_argument);

    auto edgeless = make_graph(3, {});
    std::vector<std::uint32_t> three{0, 1, 2};
    CHECK_THROWS_AS(modularity(edgeless, three), std::invalid_argument);
}

TEST_CASE("modularity matches the from-definition oracle over random labelings") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto g = testutil::random_connected_graph(rng, 3 + static_cast<std::uint32_t>(rng() % 6), 0.5, 7);
        std::vector<std::uint32_t> labels(g.node_count());
        for (auto& c : labels) c = static_cast<std::uint32_t>(rng() % 4);
        CHECK(modularity(g, labels) ==
              doctest::Approx(testutil::modularity_reference(g, labels)).epsilon(1e-12));
    }
}

TEST_CASE("fast_greedy splits bridged triangles; exhaustive search confirms the optimum") {
    auto g = bridged_triangles();
    auto partition = fast_greedy(g);
    const double expected = 6.0 / 7.0 - 0.5;
    CHECK(partition.n_communities == 2);
    CHECK(partition.modularity == doctest::Approx(expected).epsilon(1e-12));
    CHECK(partition.community_of[0] == partition.community_of[1]);
    CHECK(partition.community_of[1] == partition.community_of[2]);
    CHECK(partition.community_of[3] == partition.community_of[4]);
    CHECK(partition.community_of[4] == partition.community_of[5]);
    CHECK(partition.community_of[0] != partition.community_of[3]);

    auto best = testutil::best_partition_exhaustive(g);
    CHECK(best.q == doctest::Approx(expected).epsilon(1e-12));
    CHECK(partition.modularity == doctest::Approx(best.q).epsilon(1e-9));
}

TEST_CASE("returned Q always equals a from-scratch recomputation of the labeling") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        auto g = testutil::random_connected_graph(rng, 4 + static_cast<std::uint32_t>(rng() % 7), 0.45, 9);
        auto partition = fast_greedy(g);
        CHECK(partition.modularity ==
              doctest::Approx(modularity(g, partition.community_of)).epsilon(1e-9));
    }
}

TEST_CASE("components are never merged across (no inter-component edges)") {
    auto g = two_triangles();
    auto partition = fast_greedy(g);
    CHECK(partition.n_communities == 2);
    CHECK(partition.community_of[0] != partition.community_of[3]);
    CHECK(partition.modularity == doctest::Approx(0.5).epsilon(1e-12));
    for (const auto& step : partition.merge_log) {
        // every merge joined two communities inside one triangle
        const bool left = step.a <= 2 && step.b <= 2;
        const bool right = step.a >= 3 && step.b >= 3;
        CHECK((left || right));
    }
}

TEST_CASE("uniform edge-weight scaling changes neither labels nor Q nor merges") {
    std::mt19937_64 rng(11);
    auto base = testutil::random_connected_graph(rng, 10, 0.4, 4);
    std::vector<testutil::EdgeSpec> scaled_edges;
    for (const auto& e : base.edges()) scaled_edges.push_back({e.u, e.v, e.weight * 17});
    auto scaled = make_graph(10, scaled_edges);

    auto p1 = fast_greedy(base);
    auto p2 = fast_greedy(scaled);
    CHECK(p1.community_of == p2.community_of);
    CHECK(p1.modularity == doctest::Approx(p2.modularity).epsilon(1e-12));
    REQUIRE(p1.merge_log.size() == p2.merge_log.size());
    for (std::size_t i = 0; i < p1.merge_log.size(); ++i) {
        CHECK(p1.merge_log[i].a == p2.merge_log[i].a);
        CHECK(p1.merge_log[i].b == p2.merge_log[i].b);
    }
}

TEST_CASE("labels are dense 0..k-1 ordered by descending community size") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 10; ++trial) {
        auto g = testutil::random_connected_graph(rng, 14, 0.25, 3);
        auto partition = fast_greedy(g);
        auto sizes = partition.community_sizes();
        REQUIRE(sizes.size() == partition.n_communities);
        for (std::uint32_t c : partition.community_of) CHECK(c < partition.n_communities);
        for (std::size_t i = 1; i < sizes.size(); ++i) CHECK(sizes[i - 1] >= sizes[i]);
        for (std::uint32_t size : sizes) CHECK(size > 0);
    }
}

TEST_CASE("repeat runs are identical (deterministic tie-breaks)") {
    std::mt19937_64 rng(13);
    auto g = testutil::random_connected_graph(rng, 16, 0.3, 3);
    auto p1 = fast_greedy(g);
    auto p2 = fast_greedy(g);
    CHECK(p1.community_of == p2.community_of);
    CHECK(p1.modularity == p2.modularity);
}

TEST_CASE("merge log replay matches incrementally tracked Q at every prefix") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        auto g = testutil::random_connected_graph(rng, 8 + static_cast<std::uint32_t>(rng() % 5), 0.4, 6);
        auto partition = fast_greedy(g);

        std::vector<std::uint32_t> singletons(g.node_count());
        std::iota(singletons.begin(), singletons.end(), 0u);
        double running = modularity(g, singletons);
        for (std::size_t t = 1; t <= partition.merge_log.size(); ++t) {
            running += partition.merge_log[t - 1].delta_q;
            auto labels = replay_merges(g.node_count(), partition.merge_log, t);
            if (t == partition.merge_log.size() && partition.n_communities == 1) {
                // all-in-one labeling: Q is 0 by definition
                CHECK(running == doctest::Approx(0.0).epsilon(1e-9));
            }
            CHECK(running == doctest::Approx(modularity(g, labels)).epsilon(1e-9));
        }
    }
}

TEST_CASE("zero-weight graph falls back to singletons with Q = 0") {
    auto g = make_graph(4, {});
    auto partition = fast_greedy(g);
    CHECK(partition.n_communities == 4);
    CHECK(partition.modularity == 0.0);
    CHECK(partition.merge_log.empty());
}

TEST_CASE("empty graph is rejected") {
    auto g = make_graph(0, {});
    CHECK_THROWS_AS(fast_greedy(g), std::invalid_argument);
}

TEST_CASE("prune_small separates small communities and relabels by size") {
    // synthetic partition with sizes 60, 55, 3
    Partition partition;
    partition.n_communities = 3;
    partition.community_of.assign(118, 0);
    for (std::size_t i = 60; i < 115; ++i) partition.community_of[i] = 1;
    for (std::size_t i = 115; i < 118; ++i) partition.community_of[i] = 2;

    auto pruned = prune_small(partition, 50);
    CHECK(pruned.n_major == 2);
    REQUIRE(pruned.excluded.size() == 1);
    CHECK(pruned.excluded[0].members.size() == 3);
    CHECK(pruned.excluded_provider_count() == 3);
    auto sizes = pruned.major_sizes();
    CHECK(sizes[0] == 60);
    CHECK(sizes[1] == 55);
    CHECK(pruned.major_of[0] == 0);
    CHECK(pruned.major_of[60] == 1);
    CHECK(pruned.major_of[116] == kNoCommunity);
}

TEST_CASE("prune keeps everything when every community is large enough") {
    Partition partition;
    partition.n_communities = 2;
    partition.community_of.assign(20, 0);
    for (std::size_t i = 12; i < 20; ++i) partition.community_of[i] = 1;
    auto pruned = prune_small(partition, 5);
    CHECK(pruned.n_major == 2);
    CHECK(pruned.excluded.empty());
    CHECK(pruned.excluded_mean_size() == 0.0);
    CHECK_THROWS_AS(prune_small(partition, 0), std::invalid_argument);
}

TEST_CASE("pruning summary mirrors a 38-small-community shape") {
    // 2 large communities plus 38 of mean size 3.5 (19 of size 3, 19 of size 4)
    Partition partition;
    std::vector<std::uint32_t> labels;
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < 60; ++i) labels.push_back(c);
    std::uint32_t next = 2;
    for (int c = 0; c < 19; ++c, ++next)
        for (int i = 0; i < 3; ++i) labels.push_back(next);
    for (int c = 0; c < 19; ++c, ++next)
        for (int i = 0; i < 4; ++i) labels.push_back(next);
    partition.community_of = labels;
    partition.n_communities = next;

    auto pruned = prune_small(partition, 50);
    CHECK(pruned.n_major == 2);
    CHECK(pruned.excluded.size() == 38);
    CHECK(pruned.excluded_provider_count() == 19 * 3 + 19 * 4);
    CHECK(pruned.excluded_mean_size() == doctest::Approx(3.5));
}

TEST_CASE("adjusted Rand index basics") {
    std::vector<std::uint32_t> a{0, 0, 1, 1, 2, 2};
    CHECK(adjusted_rand_index(a, a) == doctest::Approx(1.0));
    std::vector<std::uint32_t> renamed{5, 5, 9, 9, 7, 7};
    CHECK(adjusted_rand_index(a, renamed) == doctest::Approx(1.0));
    std::vector<std::uint32_t> b{0, 1, 0, 1, 0, 1};
    CHECK(adjusted_rand_index(a, b) < 0.2);
    std::vector<std::uint32_t> shorter{0, 1};
    CHECK_THROWS_AS(adjusted_rand_index(a, shorter), std::invalid_argument);
}

TEST_CASE("planted 6-block structure is recovered from synthetic claims") {
    SynthConfig config;
    config.seed = 404;
    config.n_communities = 6;
    config.providers_per_community = {48, 55};
    config.patients_per_community = {60, 80};
    config.p_in = 0.85;
    auto output = generate(config);

    std::istringstream claims_in(output.claims_csv);
    auto parsed = parse_claims(claims_in, ClaimsParseOptions{});
    REQUIRE(parsed.rejects.empty());
    auto visits = derive_visits(parsed.claims);
    auto directory = build_provider_directory(parsed.claims);
    auto graph = apply_thresholds(
        shared_patient_counts(visits, directory, PcpSpecialtySet::defaults()), 5, 2);
    auto partition = fast_greedy(graph);

    std::map<std::string, std::uint32_t> truth;
    std::istringstream truth_in(output.provider_truth_csv);
    std::string line;
    std::getline(truth_in, line);  // header
    while (std::getline(truth_in, line)) {
        auto comma = line.find(',');
        truth[line.substr(0, comma)] = static_cast<std::uint32_t>(std::stoul(line.substr(comma + 1)));
    }

    std::vector<std::uint32_t> detected, planted;
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        detected.push_back(partition.community_of[i]);
        planted.push_back(truth.at(graph.nodes()[i].npi));
    }
    CHECK(adjusted_rand_index(detected, planted) >= 0.95);
}
