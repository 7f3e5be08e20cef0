#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "anylab/topology.hpp"

using namespace anylab;

TEST_CASE("minimal topology file") {
    std::string text =
        "# two ases, one transit link, one site\n"
        "prefix 198.51.100.0/24\n"
        "as 10 origin site=aa-org\n"
        "as 20 transit\n"
        "link 10 20 c2p lat=5\n";
    AsTopology topo = load_topology(text);
    CHECK(topo.nodes.size() == 2);
    CHECK(topo.links.size() == 1);
    CHECK(topo.sites.size() == 1);
    CHECK(topo.sites[0].host_asn == 10);
    CHECK(topo.sites[0].has_capability(Policy::Prepend));
    CHECK(topo.links[0].latency_ms == 5.0);
}

TEST_CASE("parse errors carry line numbers") {
    CHECK_THROWS_AS(load_topology("as nope name\n"), ParseError);
    try {
        load_topology("prefix 198.51.100.0/24\nbogus record\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
    // Undeclared link endpoint.
    try {
        load_topology("as 10 a\nlink 10 99 p2p\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("validation failure names the site") {
    AsTopology topo;
    AsNode n;
    n.asn = 10;
    n.name = "a";
    topo.nodes.push_back(n);
    topo.sites.push_back({"aa-org", 99, {Policy::Prepend}});
    auto violations = validate(topo);
    REQUIRE(!violations.empty());
    bool named = false;
    for (const auto& v : violations)
        if (v.find("aa-org") != std::string::npos && v.find("99") != std::string::npos) named = true;
    CHECK(named);
}

TEST_CASE("validate flags duplicates and disconnection") {
    AsTopology topo;
    for (Asn asn : {20473u, 20473u, 7u}) {
        AsNode n;
        n.asn = asn;
        n.name = "x";
        topo.nodes.push_back(n);
    }
    auto violations = validate(topo);
    int dup = 0, disc = 0;
    for (const auto& v : violations) {
        if (v.find("duplicate asn 20473") != std::string::npos) ++dup;
        if (v.find("disconnected") != std::string::npos) ++disc;
    }
    CHECK(dup == 1);
    CHECK(disc >= 1);  // no links at all: everything but the start is adrift
}

TEST_CASE("fixture matches the published site table") {
    AsTopology topo = reference_fixture(200, 1);
    CHECK(topo.sites.size() == 12);
    CHECK(validate(topo).empty());

    const AnycastSite* ens = topo.find_site("nl-ens");
    REQUIRE(ens != nullptr);
    CHECK(ens->host_asn == 1133);

    // br-gru's host is a customer of both listed transit providers and has
    // an exchange-point link set.
    const AnycastSite* gru = topo.find_site("br-gru");
    REQUIRE(gru != nullptr);
    std::set<Asn> providers;
    int ixp_links = 0;
    for (const auto& l : topo.links) {
        if (l.from_asn == gru->host_asn && l.relationship == Relationship::customer_of)
            providers.insert(l.to_asn);
        if ((l.from_asn == gru->host_asn || l.to_asn == gru->host_asn) &&
            l.relationship == Relationship::ixp_peer)
            ++ixp_links;
    }
    CHECK(providers == std::set<Asn>{20080, 1251});
    CHECK(ixp_links > 0);

    // Capability matrix split.
    for (const char* id : {"br-gru", "uk-lnd", "us-mia", "fr-par", "br-poa", "au-syd"}) {
        const AnycastSite* s = topo.find_site(id);
        REQUIRE(s != nullptr);
        CHECK(s->has_capability(Policy::NoPeer));
        CHECK(s->has_capability(Policy::NoExport));
        CHECK(s->has_capability(Policy::SelectivePrepend));
        CHECK(s->has_capability(Policy::SelectiveAdvertise));
    }
    for (const char* id : {"nl-arn", "dk-cop", "nl-ens", "jp-hnd", "us-los", "us-was"}) {
        const AnycastSite* s = topo.find_site(id);
        REQUIRE(s != nullptr);
        CHECK(s->te_capabilities == std::vector<Policy>{Policy::Prepend});
    }
    // noClient is exclusive to gru and mia.
    for (const auto& s : topo.sites)
        CHECK(s.has_capability(Policy::NoClient) == (s.site_id == "br-gru" || s.site_id == "us-mia"));

    // Both spellings of the v6 block ride along, with a note.
    CHECK(topo.anycast_prefixes.size() == 3);
    CHECK(!topo.notes.empty());

    // The master consolidates data only: present, attached, never a site.
    const AsNode* master = topo.find_node(1149);
    REQUIRE(master != nullptr);
    CHECK(!master->hosts_site);
    bool attached = false;
    for (const auto& l : topo.links)
        if ((l.from_asn == 1149 && l.to_asn == 1133) || (l.from_asn == 1133 && l.to_asn == 1149))
            attached = l.relationship == Relationship::customer_of;
    CHECK(attached);
}

TEST_CASE("load rejects disconnected topologies") {
    std::string text =
        "prefix 198.51.100.0/24\n"
        "as 10 a site=aa-org\n"
        "as 20 b\n"
        "as 30 adrift\n"
        "link 10 20 c2p\n";
    CHECK_THROWS_AS(load_topology(text), ValidationError);
    // parse_topology leaves the judgement to validate().
    AsTopology raw = parse_topology(text);
    auto violations = validate(raw);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].find("30") != std::string::npos);
}

TEST_CASE("fixture determinism and stub scaling") {
    AsTopology a = reference_fixture(200, 1);
    AsTopology b = reference_fixture(200, 1);
    CHECK(a == b);
    CHECK(serialize_topology(a) == serialize_topology(b));

    AsTopology c = reference_fixture(200, 2);
    CHECK(!(a == c));

    AsTopology d = reference_fixture(50, 1);
    CHECK(d.nodes.size() == a.nodes.size() - 150);
    for (uint64_t seed = 1; seed <= 5; ++seed) CHECK(validate(reference_fixture(100, seed)).empty());
    CHECK(validate(reference_fixture(0, 1)).empty());
}

TEST_CASE("serialize round-trips the fixture") {
    AsTopology topo = reference_fixture(120, 3);
    AsTopology back = load_topology(serialize_topology(topo));
    CHECK(back == topo);
    // Serialization is stable across the round trip too.
    CHECK(serialize_topology(load_topology(serialize_topology(back))) ==
          serialize_topology(back));
}

TEST_CASE("vantage prefixes allocate deterministically") {
    std::string text =
        "prefix 198.51.100.0/24\n"
        "as 10 a vps=2\n"
        "as 20 b vps=1\n"
        "link 10 20 c2p\n";
    AsTopology topo = load_topology(text);
    REQUIRE(topo.nodes[0].vantage_prefixes.size() == 2);
    CHECK(format_prefix(topo.nodes[0].vantage_prefixes[0]) == "10.0.0.0/24");
    CHECK(format_prefix(topo.nodes[0].vantage_prefixes[1]) == "10.0.1.0/24");
    CHECK(format_prefix(topo.nodes[1].vantage_prefixes[0]) == "10.0.2.0/24");
}
