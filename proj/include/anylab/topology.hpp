#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "anylab/prefix.hpp"

namespace anylab {

using Asn = uint32_t;

/// Thrown on malformed input files; carries the offending line number.
struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what), line(line_) {}
};

/// Thrown when a constructed object violates model invariants.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Domain-level failures (unknown site, capability violation, no route, ...).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Relationship : uint8_t {
    customer_of,  // from_asn buys transit from to_asn
    peer,
    ixp_peer,
};

/// Traffic-engineering policy names a site may be capable of.
enum class Policy : uint8_t {
    Prepend,
    NoPeer,
    NoExport,
    NoClient,
    SelectivePrepend,
    SelectiveAdvertise,
};

std::string policy_name(Policy p);
std::optional<Policy> parse_policy(std::string_view name);

struct AsNode {
    Asn asn = 0;
    std::string name;
    std::optional<std::string> hosts_site;
    std::vector<Prefix> vantage_prefixes;  // /24 (v4) blocks homed in this AS, sorted

    bool operator==(const AsNode&) const = default;
};

struct Link {
    Asn from_asn = 0;
    Asn to_asn = 0;
    Relationship relationship = Relationship::peer;
    double latency_ms = 0.0;  // one-way

    bool operator==(const Link&) const = default;
};

struct AnycastSite {
    std::string site_id;  // cc-xyz
    Asn host_asn = 0;
    std::vector<Policy> te_capabilities;  // sorted, always contains Prepend

    bool has_capability(Policy p) const;
    bool operator==(const AnycastSite&) const = default;
};

/// The AS-level world model. Plain data, immutable once built; validate()
/// reports invariant violations instead of preventing construction.
struct AsTopology {
    std::vector<AsNode> nodes;
    std::vector<Link> links;
    std::vector<AnycastSite> sites;
    std::vector<Prefix> anycast_prefixes;
    std::vector<std::string> notes;  // informational, excluded from equality

    const AsNode* find_node(Asn asn) const;
    const AnycastSite* find_site(const std::string& site_id) const;
    /// True when the prefix equals or nests inside a declared anycast prefix
    /// of the same family.
    bool covers_anycast(const Prefix& prefix) const;

    bool operator==(const AsTopology& other) const {
        return nodes == other.nodes && links == other.links && sites == other.sites &&
               anycast_prefixes == other.anycast_prefixes;
    }
};

/// Parses the line-oriented topology format without running validation.
/// Throws ParseError on grammar errors.
AsTopology parse_topology(const std::string& text);

/// parse_topology plus validation. Throws ValidationError naming every
/// violated invariant.
AsTopology load_topology(const std::string& text);

/// Inverse of load_topology on valid topologies; notes emit as comments.
std::string serialize_topology(const AsTopology& topology);

/// Returns one human-readable description per violated invariant; empty when
/// the topology is well formed.
std::vector<std::string> validate(const AsTopology& topology);

/// Built-in 12-site reference topology with `stub_count` client ASes attached
/// to seeded-random transit providers. Deterministic per (stub_count, seed).
AsTopology reference_fixture(int stub_count = 200, uint64_t seed = 1);

}  // namespace anylab
