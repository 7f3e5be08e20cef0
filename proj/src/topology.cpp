#include "anylab/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace anylab {

std::string policy_name(Policy p) {
    switch (p) {
        case Policy::Prepend: return "Prepend";
        case Policy::NoPeer: return "noPeer";
        case Policy::NoExport: return "noExport";
        case Policy::NoClient: return "noClient";
        case Policy::SelectivePrepend: return "SelectivePrepend";
        case Policy::SelectiveAdvertise: return "SelectiveAdvertise";
    }
    return "?";
}

std::optional<Policy> parse_policy(std::string_view name) {
    std::string low(name);
    std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return std::tolower(c); });
    if (low == "prepend") return Policy::Prepend;
    if (low == "nopeer") return Policy::NoPeer;
    if (low == "noexport") return Policy::NoExport;
    if (low == "noclient") return Policy::NoClient;
    if (low == "selectiveprepend") return Policy::SelectivePrepend;
    if (low == "selectiveadvertise") return Policy::SelectiveAdvertise;
    return std::nullopt;
}

bool AnycastSite::has_capability(Policy p) const {
    return std::find(te_capabilities.begin(), te_capabilities.end(), p) != te_capabilities.end();
}

const AsNode* AsTopology::find_node(Asn asn) const {
    for (const auto& n : nodes)
        if (n.asn == asn) return &n;
    return nullptr;
}

const AnycastSite* AsTopology::find_site(const std::string& site_id) const {
    for (const auto& s : sites)
        if (s.site_id == site_id) return &s;
    return nullptr;
}

bool AsTopology::covers_anycast(const Prefix& prefix) const {
    for (const auto& p : anycast_prefixes)
        if (p.family() == prefix.family() && p.contains(prefix)) return true;
    return false;
}

namespace {

std::string region_of_cc(std::string_view cc) {
    static const std::unordered_map<std::string_view, std::string> table = {
        {"us", "na"}, {"ca", "na"}, {"mx", "na"},
        {"br", "sa"}, {"ar", "sa"}, {"cl", "sa"},
        {"nl", "eu"}, {"de", "eu"}, {"fr", "eu"}, {"gb", "eu"}, {"uk", "eu"},
        {"dk", "eu"}, {"se", "eu"}, {"es", "eu"}, {"it", "eu"},
        {"jp", "as"}, {"cn", "as"}, {"in", "as"}, {"sg", "as"}, {"kr", "as"},
        {"au", "oc"}, {"nz", "oc"},
        {"za", "af"}, {"ke", "af"}, {"eg", "af"},
    };
    auto it = table.find(cc);
    return it == table.end() ? "xx" : it->second;
}

double default_latency(const std::string& ra, const std::string& rb) {
    return (ra == rb && ra != "xx") ? 10.0 : 80.0;
}

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

// Sequential /24 allocator for vantage prefixes; order of `as` declarations
// fixes the assignment, which keeps serialize -> load an identity.
struct VantageAllocator {
    uint64_t next = 0;
    std::vector<Prefix> take(int count) {
        std::vector<Prefix> out;
        out.reserve(size_t(count));
        for (int i = 0; i < count; ++i) {
            uint64_t base = 0x0A000000ull + next * 256;  // 10.0.0.0 onward
            out.push_back(Prefix{IpAddress{Family::v4, 0, base}, 24});
            ++next;
        }
        return out;
    }
};

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

bool parse_asn(const std::string& tok, Asn& out) {
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && p == tok.data() + tok.size() && out > 0;
}

}  // namespace

AsTopology parse_topology(const std::string& text) {
    AsTopology topo;
    VantageAllocator alloc;
    struct PendingLink { int line; Asn a, b; Relationship rel; std::optional<double> lat; };
    struct PendingCap { int line; std::string site; std::vector<Policy> policies; };
    std::vector<PendingLink> pending_links;
    std::vector<PendingCap> pending_caps;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            // Informational notes ride along as comments.
            std::string comment = line.substr(hash);
            if (comment.rfind("# note: ", 0) == 0) topo.notes.push_back(comment.substr(8));
            line.erase(hash);
        }
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        const std::string& kind = toks[0];
        if (kind == "as") {
            if (toks.size() < 3) throw ParseError(lineno, "as record needs <asn> <name>");
            AsNode node;
            if (!parse_asn(toks[1], node.asn)) throw ParseError(lineno, "bad asn '" + toks[1] + "'");
            node.name = toks[2];
            int vps = 0;
            for (size_t i = 3; i < toks.size(); ++i) {
                const std::string& t = toks[i];
                if (t.rfind("site=", 0) == 0) {
                    node.hosts_site = t.substr(5);
                } else if (t.rfind("vps=", 0) == 0) {
                    std::string v = t.substr(4);
                    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), vps);
                    if (ec != std::errc() || p != v.data() + v.size() || vps < 0)
                        throw ParseError(lineno, "bad vps count '" + v + "'");
                } else {
                    throw ParseError(lineno, "unknown as attribute '" + t + "'");
                }
            }
            node.vantage_prefixes = alloc.take(vps);
            if (node.hosts_site) {
                AnycastSite site;
                site.site_id = *node.hosts_site;
                site.host_asn = node.asn;
                site.te_capabilities = {Policy::Prepend};
                topo.sites.push_back(site);
            }
            topo.nodes.push_back(std::move(node));
        } else if (kind == "link") {
            if (toks.size() < 4) throw ParseError(lineno, "link record needs <asn1> <asn2> <rel>");
            PendingLink pl;
            pl.line = lineno;
            if (!parse_asn(toks[1], pl.a) || !parse_asn(toks[2], pl.b))
                throw ParseError(lineno, "bad asn in link record");
            if (toks[3] == "c2p") pl.rel = Relationship::customer_of;
            else if (toks[3] == "p2p") pl.rel = Relationship::peer;
            else if (toks[3] == "ixp") pl.rel = Relationship::ixp_peer;
            else throw ParseError(lineno, "unknown relationship '" + toks[3] + "'");
            for (size_t i = 4; i < toks.size(); ++i) {
                const std::string& t = toks[i];
                if (t.rfind("lat=", 0) == 0) {
                    try {
                        pl.lat = std::stod(t.substr(4));
                    } catch (const std::exception&) {
                        throw ParseError(lineno, "bad latency '" + t.substr(4) + "'");
                    }
                    if (*pl.lat < 0) throw ParseError(lineno, "negative latency");
                } else {
                    throw ParseError(lineno, "unknown link attribute '" + t + "'");
                }
            }
            pending_links.push_back(pl);
        } else if (kind == "prefix") {
            if (toks.size() != 2) throw ParseError(lineno, "prefix record needs <cidr>");
            auto pfx = parse_prefix(toks[1]);
            if (!pfx) throw ParseError(lineno, "malformed prefix '" + toks[1] + "'");
            topo.anycast_prefixes.push_back(*pfx);
        } else if (kind == "cap") {
            if (toks.size() != 3) throw ParseError(lineno, "cap record needs <site_id> <policies>");
            PendingCap pc;
            pc.line = lineno;
            pc.site = toks[1];
            std::istringstream ps(toks[2]);
            std::string name;
            while (std::getline(ps, name, ',')) {
                auto pol = parse_policy(name);
                if (!pol) throw ParseError(lineno, "unknown policy '" + name + "'");
                pc.policies.push_back(*pol);
            }
            pending_caps.push_back(std::move(pc));
        } else {
            throw ParseError(lineno, "unknown record kind '" + kind + "'");
        }
    }

    std::unordered_set<Asn> declared;
    for (const auto& n : topo.nodes) declared.insert(n.asn);
    for (const auto& pl : pending_links) {
        if (!declared.count(pl.a)) throw ParseError(pl.line, "link references undeclared as " + std::to_string(pl.a));
        if (!declared.count(pl.b)) throw ParseError(pl.line, "link references undeclared as " + std::to_string(pl.b));
    }
    for (const auto& pc : pending_caps) {
        bool found = false;
        for (auto& s : topo.sites) {
            if (s.site_id != pc.site) continue;
            found = true;
            for (Policy p : pc.policies)
                if (!s.has_capability(p)) s.te_capabilities.push_back(p);
            std::sort(s.te_capabilities.begin(), s.te_capabilities.end());
        }
        if (!found) throw ParseError(pc.line, "cap references unknown site '" + pc.site + "'");
    }

    // Region of a node is only known through a hosted site's country code;
    // links between unknown regions default to the inter-region class.
    auto node_region = [&](Asn asn) -> std::string {
        const AsNode* n = topo.find_node(asn);
        if (n && n->hosts_site && n->hosts_site->size() >= 2)
            return region_of_cc(std::string_view(n->hosts_site->data(), 2));
        return "xx";
    };
    for (const auto& pl : pending_links) {
        Link l;
        l.from_asn = pl.a;
        l.to_asn = pl.b;
        l.relationship = pl.rel;
        l.latency_ms = pl.lat ? *pl.lat : default_latency(node_region(pl.a), node_region(pl.b));
        topo.links.push_back(l);
    }

    std::sort(topo.sites.begin(), topo.sites.end(),
              [](const AnycastSite& a, const AnycastSite& b) { return a.site_id < b.site_id; });
    return topo;
}

AsTopology load_topology(const std::string& text) {
    AsTopology topo = parse_topology(text);
    auto violations = validate(topo);
    if (!violations.empty()) {
        std::string msg = "invalid topology:";
        for (const auto& v : violations) msg += "\n  " + v;
        throw ValidationError(msg);
    }
    return topo;
}

std::string serialize_topology(const AsTopology& topology) {
    std::ostringstream out;
    for (const auto& p : topology.anycast_prefixes) out << "prefix " << format_prefix(p) << "\n";
    for (const auto& n : topology.nodes) {
        out << "as " << n.asn << " " << n.name;
        if (n.hosts_site) out << " site=" << *n.hosts_site;
        if (!n.vantage_prefixes.empty()) out << " vps=" << n.vantage_prefixes.size();
        out << "\n";
    }
    for (const auto& l : topology.links) {
        const char* rel = l.relationship == Relationship::customer_of ? "c2p"
                          : l.relationship == Relationship::peer      ? "p2p"
                                                                      : "ixp";
        out << "link " << l.from_asn << " " << l.to_asn << " " << rel << " lat=" << format_double(l.latency_ms)
            << "\n";
    }
    for (const auto& s : topology.sites) {
        out << "cap " << s.site_id << " ";
        for (size_t i = 0; i < s.te_capabilities.size(); ++i) {
            if (i) out << ",";
            out << policy_name(s.te_capabilities[i]);
        }
        out << "\n";
    }
    for (const auto& note : topology.notes) out << "# note: " << note << "\n";
    return out.str();
}

std::vector<std::string> validate(const AsTopology& topology) {
    std::vector<std::string> out;
    std::unordered_map<Asn, int> asn_count;
    for (const auto& n : topology.nodes) ++asn_count[n.asn];
    for (const auto& [asn, count] : asn_count)
        if (count > 1) out.push_back("duplicate asn " + std::to_string(asn));

    std::unordered_map<std::string, int> site_host_count;
    for (const auto& n : topology.nodes)
        if (n.hosts_site) ++site_host_count[*n.hosts_site];
    for (const auto& [sid, count] : site_host_count)
        if (count > 1) out.push_back("site " + sid + " hosted on more than one as");

    std::unordered_map<std::string, int> site_count;
    for (const auto& s : topology.sites) ++site_count[s.site_id];
    for (const auto& [sid, count] : site_count)
        if (count > 1) out.push_back("duplicate site " + sid);

    std::set<std::pair<Asn, Asn>> seen_pairs;
    for (const auto& l : topology.links) {
        if (l.from_asn == l.to_asn) {
            out.push_back("self-link at as " + std::to_string(l.from_asn));
            continue;
        }
        auto key = std::minmax(l.from_asn, l.to_asn);
        if (!seen_pairs.insert(key).second)
            out.push_back("duplicate link " + std::to_string(key.first) + "-" + std::to_string(key.second));
        if (l.latency_ms < 0)
            out.push_back("negative latency on link " + std::to_string(l.from_asn) + "-" +
                          std::to_string(l.to_asn));
        if (!asn_count.count(l.from_asn))
            out.push_back("link references unknown as " + std::to_string(l.from_asn));
        if (!asn_count.count(l.to_asn))
            out.push_back("link references unknown as " + std::to_string(l.to_asn));
    }

    auto valid_site_id = [](const std::string& id) {
        if (id.size() < 4 || id.size() > 11) return false;
        if (!std::islower((unsigned char)id[0]) || !std::islower((unsigned char)id[1])) return false;
        if (id[2] != '-') return false;
        for (size_t i = 3; i < id.size(); ++i)
            if (!std::islower((unsigned char)id[i]) && !std::isdigit((unsigned char)id[i])) return false;
        return true;
    };
    for (const auto& s : topology.sites) {
        if (!valid_site_id(s.site_id))
            out.push_back("site " + s.site_id + " violates the cc-xyz naming convention");
        if (!asn_count.count(s.host_asn))
            out.push_back("site " + s.site_id + ": host as " + std::to_string(s.host_asn) +
                          " not declared");
        if (!s.has_capability(Policy::Prepend))
            out.push_back("site " + s.site_id + " lacks the mandatory Prepend capability");
        const AsNode* host = topology.find_node(s.host_asn);
        if (host && (!host->hosts_site || *host->hosts_site != s.site_id))
            out.push_back("site " + s.site_id + ": host as does not reference it back");
    }

    // Connectivity over the undirected link graph.
    if (!topology.nodes.empty()) {
        std::unordered_map<Asn, std::vector<Asn>> adj;
        for (const auto& l : topology.links) {
            adj[l.from_asn].push_back(l.to_asn);
            adj[l.to_asn].push_back(l.from_asn);
        }
        std::unordered_set<Asn> seen;
        std::vector<Asn> stack{topology.nodes.front().asn};
        seen.insert(stack.back());
        while (!stack.empty()) {
            Asn v = stack.back();
            stack.pop_back();
            for (Asn w : adj[v])
                if (seen.insert(w).second) stack.push_back(w);
        }
        for (const auto& n : topology.nodes)
            if (!seen.count(n.asn))
                out.push_back("as " + std::to_string(n.asn) + " (" + n.name +
                              ") is disconnected from the topology");
    }
    return out;
}

namespace {

struct FixtureBuilder {
    AsTopology topo;
    VantageAllocator alloc;
    std::unordered_map<Asn, std::string> region;

    void add_as(Asn asn, std::string name, std::string reg, int vps = 0) {
        AsNode n;
        n.asn = asn;
        n.name = std::move(name);
        n.vantage_prefixes = alloc.take(vps);
        topo.nodes.push_back(std::move(n));
        region[asn] = std::move(reg);
    }
    void add_site(Asn host, const std::string& site_id, const std::vector<Policy>& caps) {
        for (auto& n : topo.nodes)
            if (n.asn == host) n.hosts_site = site_id;
        AnycastSite s;
        s.site_id = site_id;
        s.host_asn = host;
        s.te_capabilities = caps;
        std::sort(s.te_capabilities.begin(), s.te_capabilities.end());
        topo.sites.push_back(std::move(s));
    }
    void add_link(Asn a, Asn b, Relationship rel, std::optional<double> lat = std::nullopt) {
        Link l;
        l.from_asn = a;
        l.to_asn = b;
        l.relationship = rel;
        l.latency_ms = lat ? *lat : default_latency(region[a], region[b]);
        topo.links.push_back(l);
    }
};

}  // namespace

AsTopology reference_fixture(int stub_count, uint64_t seed) {
    FixtureBuilder b;
    b.topo.anycast_prefixes = {
        *parse_prefix("145.100.118.0/23"),
        *parse_prefix("2001:610:900::/40"),
        *parse_prefix("2001:610:9000::/40"),
    };
    b.topo.notes.push_back(
        "ipv6 anycast prefix appears in the source data under two spellings "
        "(2001:610:900::/40 and 2001:610:9000::/40); both are carried as aliases");

    // Transit providers, in first-appearance order of the connectivity table.
    b.add_as(20473, "Vultr", "xx");
    b.add_as(20080, "Ampath", "na");
    b.add_as(1251, "ANSP", "sa");
    b.add_as(262605, "Leovin", "sa");
    b.add_as(264575, "Nexfibra", "sa");
    b.add_as(39839, "DK-Hostmaster", "eu");
    b.add_as(2500, "Wide", "as");
    b.add_as(1133, "UTwente", "eu");
    b.add_as(4, "USC", "na");
    b.add_as(226, "LosNettos", "na");
    b.add_as(1140, "SIDN", "eu");

    const std::vector<Policy> basic = {Policy::Prepend};
    const std::vector<Policy> extended = {Policy::Prepend, Policy::NoPeer, Policy::NoExport,
                                          Policy::SelectivePrepend, Policy::SelectiveAdvertise};
    std::vector<Policy> full = extended;
    full.push_back(Policy::NoClient);

    // One row per site. Sites whose sole transit provider appears only for
    // that row live inside the provider's AS; the rest get a dedicated host
    // AS attached as customer of each listed provider.
    b.add_as(65001, "syd-anycast", "oc");
    b.add_site(65001, "au-syd", extended);
    b.add_link(65001, 20473, Relationship::customer_of, 10.0);

    b.add_as(65002, "gru-anycast", "sa");
    b.add_site(65002, "br-gru", full);
    b.add_link(65002, 20080, Relationship::customer_of, 10.0);
    b.add_link(65002, 1251, Relationship::customer_of, 10.0);

    b.add_as(65003, "poa-anycast", "sa");
    b.add_site(65003, "br-poa", extended);
    b.add_link(65003, 262605, Relationship::customer_of, 10.0);
    b.add_link(65003, 264575, Relationship::customer_of, 10.0);

    b.add_site(39839, "dk-cop", basic);

    b.add_as(65004, "lnd-anycast", "eu");
    b.add_site(65004, "uk-lnd", extended);
    b.add_link(65004, 20473, Relationship::customer_of, 10.0);

    b.add_as(65005, "par-anycast", "eu");
    b.add_site(65005, "fr-par", extended);
    b.add_link(65005, 20473, Relationship::customer_of, 10.0);

    b.add_site(2500, "jp-hnd", basic);
    b.add_site(1133, "nl-ens", basic);
    b.add_site(4, "us-los", basic);

    b.add_as(65006, "mia-anycast", "na");
    b.add_site(65006, "us-mia", full);
    b.add_link(65006, 20080, Relationship::customer_of, 10.0);

    b.add_site(226, "us-was", basic);
    b.add_site(1140, "nl-arn", basic);

    // Full peer mesh across the transit core.
    const std::vector<Asn> transit = {20473, 20080, 1251, 262605, 264575, 39839,
                                      2500,  1133,  4,    226,    1140};
    for (size_t i = 0; i < transit.size(); ++i)
        for (size_t j = i + 1; j < transit.size(); ++j)
            b.add_link(transit[i], transit[j], Relationship::peer);

    // Measurement master: data consolidation only, never announces.
    b.add_as(1149, "master", "eu");
    b.add_link(1149, 1133, Relationship::customer_of, 10.0);

    // Stub client cloud. All draws come from one generator in a fixed order,
    // so a (stub_count, seed) pair fully determines the topology.
    std::mt19937_64 rng(seed);
    static const std::vector<std::string> stub_regions = {"na", "eu", "as", "sa", "oc", "af"};
    std::vector<Asn> stubs;
    stubs.reserve(size_t(std::max(stub_count, 0)));
    for (int i = 1; i <= stub_count; ++i) {
        Asn asn = 100000 + Asn(i);
        std::string reg = stub_regions[rng() % stub_regions.size()];
        int vps = 1 + int(rng() % 3);
        b.add_as(asn, "stub" + std::to_string(i), reg, vps);
        stubs.push_back(asn);
        size_t first = rng() % transit.size();
        b.add_link(asn, transit[first], Relationship::customer_of);
        if (rng() % 10 >= 7) {
            size_t second = rng() % transit.size();
            if (second != first) b.add_link(asn, transit[second], Relationship::customer_of);
        }
    }

    // Exchange-point fan-out approximates the table's peer counts,
    // proportionally scaled onto the stub cloud.
    struct IxpSite { Asn host; double table_peers; };
    const std::vector<IxpSite> ixp_sites = {{65002, 1892}, {65003, 218}, {65004, 1}, {65005, 1}};
    const double total_peers = 1892 + 218 + 1 + 1;
    for (const auto& site : ixp_sites) {
        if (stubs.empty()) break;
        size_t want = size_t(std::max<long long>(
            1, std::llround(double(stub_count) * site.table_peers / total_peers)));
        want = std::min(want, stubs.size());
        std::vector<Asn> pool = stubs;
        for (size_t k = 0; k < want; ++k) {
            size_t pick = k + rng() % (pool.size() - k);
            std::swap(pool[k], pool[pick]);
            b.add_link(site.host, pool[k], Relationship::ixp_peer, 10.0);
        }
    }
    std::sort(b.topo.sites.begin(), b.topo.sites.end(),
              [](const AnycastSite& a, const AnycastSite& c) { return a.site_id < c.site_id; });
    return b.topo;
}

}  // namespace anylab
