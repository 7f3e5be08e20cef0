#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "anylab/topology.hpp"

namespace anylab {

/// BGP community actions a site can attach to an announcement. Suppression
/// and selective actions execute at the ASes that hear the announcement
/// directly from the origin; Prepend inflates the origin's own path.
struct Community {
    enum class Kind : uint8_t {
        Prepend,                  // n
        NoPeer,
        NoExport,
        NoClient,
        SelectivePrepend,         // target, n
        SelectiveAdvertiseOnly,   // target
        SelectiveAdvertiseExcept, // target
    };
    Kind kind = Kind::NoExport;
    Asn target = 0;
    int count = 0;

    /// The capability a site must hold to use this community.
    Policy required_policy() const;
    std::string to_string() const;

    auto operator<=>(const Community&) const = default;
};

std::optional<Community> parse_community(std::string_view spec);

struct Announcement {
    std::string site_id;
    Prefix prefix;
    int origin_prepend = 0;
    std::vector<Asn> poisoned_asns;    // sorted, unique
    std::vector<Community> communities; // sorted, unique

    bool operator==(const Announcement&) const = default;
};

/// Normalizes poison/community ordering and checks the type invariants
/// (site exists, capabilities cover the communities, prefix nests inside a
/// declared anycast prefix, prepend counts positive). Throws DomainError.
void check_announcement(const AsTopology& topology, Announcement& announcement);

struct RibEntry {
    Asn asn = 0;
    Prefix prefix;
    std::vector<Asn> as_path;  // next hop first, origin last; prepends repeat
    Asn next_hop_asn = 0;
    std::string origin_site_id;
    int local_pref = 0;

    bool operator==(const RibEntry&) const = default;
};

/// Best route per (asn, prefix) after propagation, plus the announcement set
/// that produced it. Immutable once returned.
class RibSet {
public:
    RibSet() = default;
    RibSet(std::shared_ptr<const AsTopology> topology, std::vector<Announcement> announcements,
           std::map<std::pair<Asn, Prefix>, RibEntry> entries)
        : topology_(std::move(topology)),
          announcements_(std::move(announcements)),
          entries_(std::move(entries)) {}

    const AsTopology& topology() const { return *topology_; }
    std::shared_ptr<const AsTopology> topology_ptr() const { return topology_; }
    const std::vector<Announcement>& announcements() const { return announcements_; }
    const std::map<std::pair<Asn, Prefix>, RibEntry>& entries() const { return entries_; }

    const RibEntry* find(Asn asn, const Prefix& prefix) const;
    /// Longest-prefix-match entry for an address at one AS.
    const RibEntry* lookup(Asn asn, const IpAddress& addr) const;

    bool operator==(const RibSet& other) const { return entries_ == other.entries_; }

private:
    std::shared_ptr<const AsTopology> topology_;
    std::vector<Announcement> announcements_;
    std::map<std::pair<Asn, Prefix>, RibEntry> entries_;
};

/// Raised when propagation exceeds its work bound (a defect signal; the
/// policy model is monotone and should always converge).
struct OscillationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PropagateOptions {
    uint64_t order_seed = 0;       // internal processing order; must not affect output
    uint64_t work_cap_override = 0;  // test hook; 0 = derived from topology size
};

/// Computes every AS's best route per announced prefix under valley-free
/// (Gao-Rexford) export, relationship-tiered preference (customer 200 >
/// peer/ixp 100 > provider 50), path length with prepends, lowest-next-hop
/// tie-break, and community/poison handling.
RibSet propagate(std::shared_ptr<const AsTopology> topology,
                 std::vector<Announcement> announcements, const PropagateOptions& options = {});

/// propagate() for a single announcement carrying poisoned ASNs.
RibSet poisoned_reachability(std::shared_ptr<const AsTopology> topology,
                             Announcement announcement);

/// Origin site chosen by each AS for traffic to the given anycast prefix
/// (longest-prefix-match on the prefix's service address). ASes without a
/// route are absent.
std::map<Asn, std::string> catchment(const RibSet& rib, const Prefix& anycast_prefix);

/// AS hops from `from_asn` to the origin of its best (LPM) route, obtained by
/// following each AS's next hop. Empty when from_asn originates. Throws
/// DomainError when no route exists.
std::vector<Asn> forward_path(const RibSet& rib, Asn from_asn, const Prefix& prefix);

/// Best unicast path from every AS toward target_asn (the hop sequence ends
/// at target_asn), under the same valley-free engine with the target as sole
/// originator. ASes that cannot reach the target are absent.
std::unordered_map<Asn, std::vector<Asn>> unicast_paths(const AsTopology& topology, Asn target_asn);

/// Sum of one-way link latencies along `from_asn` -> hops[0] -> ... -> back().
double path_latency(const AsTopology& topology, Asn from_asn, const std::vector<Asn>& hops);

/// Debug export: `asn,prefix,as_path,next_hop,origin_site` rows sorted by
/// (asn, prefix); as_path is space-separated.
std::string rib_to_csv(const RibSet& rib);

}  // namespace anylab
