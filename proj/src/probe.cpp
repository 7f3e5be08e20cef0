#include "anylab/probe.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace anylab {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

std::vector<HitListEntry> load_hitlist(const std::string& text, const AsTopology& topology) {
    std::vector<HitListEntry> out;
    std::set<Prefix> seen_blocks;
    std::unordered_set<Asn> known;
    for (const auto& n : topology.nodes) known.insert(n.asn);

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1 && line == "address,cc,asn") continue;
        std::vector<std::string> cols;
        std::istringstream ls(line);
        std::string col;
        while (std::getline(ls, col, ',')) cols.push_back(col);
        if (cols.size() != 3) throw ParseError(lineno, "expected address,cc,asn");
        auto addr = parse_address(cols[0]);
        if (!addr) throw ParseError(lineno, "bad address '" + cols[0] + "'");
        HitListEntry e;
        e.address = *addr;
        e.cc = cols[1];
        auto [p, ec] = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), e.asn);
        if (ec != std::errc() || p != cols[2].data() + cols[2].size())
            throw ParseError(lineno, "bad asn '" + cols[2] + "'");
        if (!seen_blocks.insert(vantage_block(e.address)).second) continue;
        e.routable = known.count(e.asn) > 0;
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<HitListEntry> synth_hitlist(const AsTopology& topology, int count, uint64_t seed) {
    static const std::vector<std::string> cc_pool = {"US", "NL", "BR", "JP", "AU", "DE", "FR",
                                                     "GB", "DK", "SG", "ZA", "CA", "IN", "SE"};
    std::vector<HitListEntry> out;
    out.reserve(size_t(std::max(count, 0)));
    if (topology.nodes.empty()) return out;
    for (int i = 0; i < count; ++i) {
        const AsNode& node =
            topology.nodes[size_t(splitmix64(seed * 0x10001 + uint64_t(i)) % topology.nodes.size())];
        HitListEntry e;
        // Distinct /24 per entry, walked upward from 1.0.0.0.
        uint64_t base = 0x01000000ull + uint64_t(i) * 256;
        e.address = IpAddress{Family::v4, 0, base + 1};
        e.asn = node.asn;
        if (node.hosts_site && node.hosts_site->size() >= 2) {
            e.cc = node.hosts_site->substr(0, 2);
            std::transform(e.cc.begin(), e.cc.end(), e.cc.begin(),
                           [](unsigned char c) { return std::toupper(c); });
        } else {
            e.cc = cc_pool[splitmix64(uint64_t(node.asn) * 0x9e37 + seed) % cc_pool.size()];
        }
        out.push_back(std::move(e));
    }
    return out;
}

namespace {

void check_plan(const AsTopology& topology, const MeasurementPlan& plan) {
    if (plan.pinger_sites.empty()) throw DomainError("measurement plan needs at least one pinger site");
    for (const auto& s : plan.pinger_sites)
        if (!topology.find_site(s)) throw DomainError("unknown pinger site '" + s + "'");
    if (!(plan.rate_pps > 0)) throw DomainError("probe rate must be positive");
}

}  // namespace

int64_t estimate_duration_seconds(const MeasurementPlan& plan) {
    if (plan.pinger_sites.empty()) throw DomainError("measurement plan needs at least one pinger site");
    if (!(plan.rate_pps > 0)) throw DomainError("probe rate must be positive");
    if (plan.hitlist.empty()) return 0;
    double aggregate = plan.rate_pps * double(plan.pinger_sites.size());
    return int64_t(std::ceil(double(plan.hitlist.size()) / aggregate));
}

std::optional<std::string> pace_check(const MeasurementPlan& plan, double aggregate_threshold_pps) {
    double aggregate = plan.rate_pps * double(plan.pinger_sites.size());
    if (aggregate <= aggregate_threshold_pps) return std::nullopt;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "aggregate probe rate %.0f pps exceeds the abuse threshold of %.0f pps",
                  aggregate, aggregate_threshold_pps);
    return std::string(buf);
}

std::vector<ReplyRecord> run_measurement(const RibSet& rib, const MeasurementPlan& plan,
                                         const MeasurementOptions& options) {
    const AsTopology& topo = rib.topology();
    check_plan(topo, plan);

    IpAddress service_addr = plan.anycast_prefix.first_host();
    bool announced = false;
    for (const auto& a : rib.announcements())
        if (a.prefix.contains(service_addr)) announced = true;
    if (!announced)
        throw DomainError("empty catchment: no site announces " + format_prefix(plan.anycast_prefix));

    std::map<std::pair<Asn, Asn>, double> lat;
    for (const auto& l : topo.links) {
        lat[{l.from_asn, l.to_asn}] = l.latency_ms;
        lat[{l.to_asn, l.from_asn}] = l.latency_ms;
    }
    auto walk_latency = [&](Asn from, const std::vector<Asn>& hops) {
        double total = 0.0;
        Asn cur = from;
        for (Asn next : hops) {
            total += lat.at({cur, next});
            cur = next;
        }
        return total;
    };

    // Reply side, one evaluation per distinct vantage AS.
    struct ReplyInfo {
        std::string site;
        Prefix matched;
        int hops = 0;
        double latency = 0.0;
    };
    std::unordered_map<Asn, std::optional<ReplyInfo>> reply_cache;
    for (const auto& e : plan.hitlist) {
        if (!e.routable || reply_cache.count(e.asn)) continue;
        const RibEntry* route = rib.lookup(e.asn, service_addr);
        if (!route) {
            reply_cache.emplace(e.asn, std::nullopt);
            continue;
        }
        std::vector<Asn> hops = forward_path(rib, e.asn, route->prefix);
        ReplyInfo info;
        info.site = route->origin_site_id;
        info.matched = route->prefix;
        info.hops = int(hops.size());
        info.latency = walk_latency(e.asn, hops);
        reply_cache.emplace(e.asn, std::move(info));
    }

    // Forward side: best unicast path from each pinger AS to each vantage AS.
    std::vector<Asn> pinger_asn;
    for (const auto& s : plan.pinger_sites) pinger_asn.push_back(topo.find_site(s)->host_asn);
    std::unordered_map<Asn, std::unordered_map<Asn, double>> fwd_latency;  // vp_as -> pinger_as -> ms
    for (const auto& [vp_as, info] : reply_cache) {
        if (!info) continue;
        auto paths = unicast_paths(topo, vp_as);
        auto& per_pinger = fwd_latency[vp_as];
        for (Asn p : pinger_asn) {
            auto it = paths.find(p);
            if (it != paths.end()) per_pinger.emplace(p, walk_latency(p, it->second));
        }
    }

    auto probe_one = [&](size_t idx) -> std::optional<ReplyRecord> {
        const HitListEntry& e = plan.hitlist[idx];
        if (!e.routable) return std::nullopt;
        auto cache_it = reply_cache.find(e.asn);
        if (cache_it == reply_cache.end() || !cache_it->second) return std::nullopt;
        const ReplyInfo& info = *cache_it->second;
        Asn pinger = pinger_asn[idx % pinger_asn.size()];
        auto fwd_it = fwd_latency.find(e.asn);
        auto leg = fwd_it->second.find(pinger);
        if (leg == fwd_it->second.end()) return std::nullopt;  // pinger cannot reach the VP
        if (options.loss_probability > 0.0) {
            uint64_t h = splitmix64(options.loss_seed ^ splitmix64(e.address.lo ^ (e.address.hi << 1)));
            if (double(h) / double(UINT64_MAX) < options.loss_probability) return std::nullopt;
        }
        ReplyRecord r;
        r.site = info.site;
        r.time_diff_ms = std::max(leg->second + info.latency, 1e-6);
        r.target_ip = e.address;
        r.anycast_ip = info.matched.first_host();
        r.ttl = 64 - info.hops;
        r.cc = e.cc;
        r.asn = e.asn;
        return r;
    };

    std::vector<ReplyRecord> records;
    int workers = std::max(options.workers, 1);
    if (workers == 1) {
        for (size_t i = 0; i < plan.hitlist.size(); ++i)
            if (auto r = probe_one(i)) records.push_back(std::move(*r));
    } else {
        std::vector<std::vector<ReplyRecord>> parts;
        parts.resize(size_t(workers));
        std::vector<std::thread> threads;
        size_t chunk = (plan.hitlist.size() + size_t(workers) - 1) / size_t(workers);
        for (int w = 0; w < workers; ++w) {
            threads.emplace_back([&, w] {
                size_t begin = size_t(w) * chunk;
                size_t end = std::min(begin + chunk, plan.hitlist.size());
                for (size_t i = begin; i < end; ++i)
                    if (auto r = probe_one(i)) parts[size_t(w)].push_back(std::move(*r));
            });
        }
        for (auto& t : threads) t.join();
        for (auto& part : parts)
            records.insert(records.end(), std::make_move_iterator(part.begin()),
                           std::make_move_iterator(part.end()));
    }
    std::sort(records.begin(), records.end(), [](const ReplyRecord& a, const ReplyRecord& b) {
        if (a.site != b.site) return a.site < b.site;
        return a.target_ip < b.target_ip;
    });
    return records;
}

}  // namespace anylab
