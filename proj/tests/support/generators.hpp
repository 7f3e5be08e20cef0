#pragma once

// Seeded random topologies and announcement sets for property tests.

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "anylab/routing.hpp"
#include "anylab/topology.hpp"

namespace anylab::testgen {

inline Prefix test_prefix() { return *parse_prefix("198.51.100.0/24"); }

struct Generated {
    std::shared_ptr<AsTopology> topology;
    std::vector<Announcement> announcements;
};

// Connected topology with mixed link relationships and 1..max_sites sites
// carrying every capability. ASNs are 10, 20, 30, ...
inline std::shared_ptr<AsTopology> random_topology(std::mt19937_64& rng, int max_nodes = 8,
                                                   int max_sites = 3) {
    auto topo = std::make_shared<AsTopology>();
    int n = 2 + int(rng() % uint64_t(max_nodes - 1));
    for (int i = 0; i < n; ++i) {
        AsNode node;
        node.asn = Asn(10 * (i + 1));
        node.name = "as" + std::to_string(node.asn);
        topo->nodes.push_back(node);
    }
    auto rel_of = [&](uint64_t draw) {
        switch (draw % 3) {
            case 0: return Relationship::customer_of;
            case 1: return Relationship::peer;
            default: return Relationship::ixp_peer;
        }
    };
    // Spanning tree first, then extra edges.
    for (int i = 1; i < n; ++i) {
        int j = int(rng() % uint64_t(i));
        bool flip = rng() % 2;
        Link l;
        l.from_asn = topo->nodes[size_t(flip ? i : j)].asn;
        l.to_asn = topo->nodes[size_t(flip ? j : i)].asn;
        l.relationship = rel_of(rng());
        l.latency_ms = double(1 + rng() % 50);
        topo->links.push_back(l);
    }
    int extra = int(rng() % uint64_t(n));
    for (int k = 0; k < extra; ++k) {
        int i = int(rng() % uint64_t(n)), j = int(rng() % uint64_t(n));
        if (i == j) continue;
        bool dup = false;
        for (const auto& l : topo->links)
            if ((l.from_asn == topo->nodes[size_t(i)].asn && l.to_asn == topo->nodes[size_t(j)].asn) ||
                (l.from_asn == topo->nodes[size_t(j)].asn && l.to_asn == topo->nodes[size_t(i)].asn))
                dup = true;
        if (dup) continue;
        Link l;
        l.from_asn = topo->nodes[size_t(i)].asn;
        l.to_asn = topo->nodes[size_t(j)].asn;
        l.relationship = rel_of(rng());
        l.latency_ms = double(1 + rng() % 50);
        topo->links.push_back(l);
    }
    topo->anycast_prefixes.push_back(test_prefix());
    int sites = 1 + int(rng() % uint64_t(max_sites));
    std::vector<Policy> all = {Policy::Prepend,         Policy::NoPeer,
                               Policy::NoExport,        Policy::NoClient,
                               Policy::SelectivePrepend, Policy::SelectiveAdvertise};
    for (int s = 0; s < sites && s < n; ++s) {
        // Distinct host per site.
        int host_idx;
        do { host_idx = int(rng() % uint64_t(n)); } while (topo->nodes[size_t(host_idx)].hosts_site);
        AnycastSite site;
        site.site_id = "zz-s" + std::to_string(s + 1);
        site.host_asn = topo->nodes[size_t(host_idx)].asn;
        site.te_capabilities = all;
        topo->nodes[size_t(host_idx)].hosts_site = site.site_id;
        topo->sites.push_back(site);
    }
    return topo;
}

inline std::vector<Announcement> random_announcements(std::mt19937_64& rng, const AsTopology& topo,
                                                      int max_announcements = 3,
                                                      bool with_communities = true) {
    std::vector<Announcement> anns;
    int count = 1 + int(rng() % uint64_t(std::min<size_t>(size_t(max_announcements), topo.sites.size())));
    for (int i = 0; i < count; ++i) {
        Announcement a;
        a.site_id = topo.sites[size_t(i)].site_id;
        // Occasionally announce a sub-prefix so multi-prefix selection is hit.
        a.prefix = rng() % 3 == 0 ? *parse_prefix("198.51.100.0/25") : test_prefix();
        a.origin_prepend = int(rng() % 4 == 0 ? rng() % 3 : 0);
        if (with_communities) {
            auto random_node = [&] { return topo.nodes[rng() % topo.nodes.size()].asn; };
            if (rng() % 8 == 0) a.communities.push_back({Community::Kind::Prepend, 0, 1 + int(rng() % 2)});
            if (rng() % 8 == 0) a.communities.push_back({Community::Kind::NoPeer, 0, 0});
            if (rng() % 12 == 0) a.communities.push_back({Community::Kind::NoExport, 0, 0});
            if (rng() % 10 == 0) a.communities.push_back({Community::Kind::NoClient, 0, 0});
            if (rng() % 8 == 0)
                a.communities.push_back({Community::Kind::SelectivePrepend, random_node(), 1 + int(rng() % 2)});
            if (rng() % 12 == 0)
                a.communities.push_back({Community::Kind::SelectiveAdvertiseOnly, random_node(), 0});
            if (rng() % 10 == 0)
                a.communities.push_back({Community::Kind::SelectiveAdvertiseExcept, random_node(), 0});
            if (rng() % 7 == 0) {
                Asn host = topo.find_site(a.site_id)->host_asn;
                Asn target = topo.nodes[rng() % topo.nodes.size()].asn;
                if (target != host) a.poisoned_asns.push_back(target);
            }
        }
        anns.push_back(std::move(a));
    }
    return anns;
}

inline Generated random_case(uint64_t seed, int max_nodes = 8, int max_announcements = 3) {
    std::mt19937_64 rng(seed);
    Generated g;
    g.topology = random_topology(rng, max_nodes);
    g.announcements = random_announcements(rng, *g.topology, max_announcements);
    return g;
}

}  // namespace anylab::testgen
