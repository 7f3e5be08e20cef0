#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "anylab/routing.hpp"
#include "anylab/topology.hpp"

namespace anylab {

struct HitListEntry {
    IpAddress address;  // representative address of a /24 (or /48) network
    std::string cc;
    Asn asn = 0;
    bool routable = true;  // asn present in the topology

    bool operator==(const HitListEntry&) const = default;
};

struct MeasurementPlan {
    std::vector<HitListEntry> hitlist;
    std::vector<std::string> pinger_sites;
    double rate_pps = 3612.0;  // per pinger; default reproduces a 30-minute
                               // full sweep of a 6.5M-entry hit list
    Prefix anycast_prefix;
    int64_t start_time_ms = 0;
};

struct ReplyRecord {
    std::string site;
    double time_diff_ms = 0.0;  // printed with 6 decimals
    IpAddress target_ip;
    IpAddress anycast_ip;
    int ttl = 0;
    std::string cc;
    Asn asn = 0;

    bool operator==(const ReplyRecord&) const = default;
};

/// Parses `address,cc,asn` rows (optional header). Entries are deduplicated
/// per /24 (first occurrence wins, input order preserved); entries whose AS
/// is not in the topology are kept but flagged unroutable.
std::vector<HitListEntry> load_hitlist(const std::string& text, const AsTopology& topology);

/// Deterministic synthetic hit list: `count` distinct /24 representatives
/// spread across the topology's ASes under the seed.
std::vector<HitListEntry> synth_hitlist(const AsTopology& topology, int count, uint64_t seed = 1);

/// ceil(|hitlist| / (rate_pps * |pingers|)), in seconds.
int64_t estimate_duration_seconds(const MeasurementPlan& plan);

/// Warning text when the aggregate probe rate exceeds the abuse threshold.
std::optional<std::string> pace_check(const MeasurementPlan& plan,
                                      double aggregate_threshold_pps = 10000.0);

struct MeasurementOptions {
    int workers = 1;               // output is identical for any worker count
    double loss_probability = 0.0; // uniform seeded loss, off by default
    uint64_t loss_seed = 1;
};

/// Simulates one measurement round: probes flow pinger -> VP, replies flow
/// VP -> catchment site; each record carries the triangular RTT (both legs'
/// link latencies), TTL as 64 minus reply AS hops, and the hit list's CC/ASN.
/// Output is sorted by (site, target_ip). Throws DomainError when no site
/// announces the prefix.
std::vector<ReplyRecord> run_measurement(const RibSet& rib, const MeasurementPlan& plan,
                                         const MeasurementOptions& options = {});

}  // namespace anylab
