#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace anylab {

enum class Family : uint8_t { v4, v6 };

/// An IPv4 or IPv6 address held as a 128-bit value (v4 in the low 32 bits).
struct IpAddress {
    Family family = Family::v4;
    uint64_t hi = 0;
    uint64_t lo = 0;

    auto operator<=>(const IpAddress&) const = default;
};

std::optional<IpAddress> parse_address(std::string_view text);
std::string format_address(const IpAddress& addr);

IpAddress address_plus(const IpAddress& addr, uint64_t delta);

/// CIDR block. The stored address is the network address (host bits zero).
struct Prefix {
    IpAddress network;
    uint8_t length = 0;

    Family family() const { return network.family; }
    bool contains(const IpAddress& addr) const;
    bool contains(const Prefix& other) const;
    /// Service address convention: network address + 1.
    IpAddress first_host() const { return address_plus(network, 1); }

    auto operator<=>(const Prefix&) const = default;
};

/// Parses "a.b.c.d/len" or an IPv6 CIDR. Host bits set beyond the mask are an error.
std::optional<Prefix> parse_prefix(std::string_view text);
std::string format_prefix(const Prefix& prefix);

/// The /24 (v4) or /48 (v6) block an address belongs to; vantage points are
/// deduplicated on this key.
Prefix vantage_block(const IpAddress& addr);

}  // namespace anylab
