#include "anylab/prefix.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace anylab {

namespace {

bool parse_u16_hex(std::string_view s, uint16_t& out) {
    if (s.empty() || s.size() > 4) return false;
    uint32_t v = 0;
    for (char c : s) {
        uint32_t d;
        if (c >= '0' && c <= '9') d = uint32_t(c - '0');
        else if (c >= 'a' && c <= 'f') d = uint32_t(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F') d = uint32_t(c - 'A' + 10);
        else return false;
        v = v * 16 + d;
    }
    out = uint16_t(v);
    return true;
}

std::optional<IpAddress> parse_v4(std::string_view text) {
    uint32_t value = 0;
    int octets = 0;
    size_t i = 0;
    while (i <= text.size()) {
        size_t j = i;
        while (j < text.size() && text[j] != '.') ++j;
        std::string_view part = text.substr(i, j - i);
        if (part.empty() || part.size() > 3) return std::nullopt;
        uint32_t octet = 0;
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), octet);
        if (ec != std::errc() || p != part.data() + part.size() || octet > 255) return std::nullopt;
        value = (value << 8) | octet;
        ++octets;
        if (j == text.size()) break;
        i = j + 1;
        if (i == text.size()) return std::nullopt;  // trailing dot
    }
    if (octets != 4) return std::nullopt;
    return IpAddress{Family::v4, 0, value};
}

std::optional<IpAddress> parse_v6(std::string_view text) {
    // Split on "::" once, then parse 16-bit groups on each side.
    std::array<uint16_t, 8> groups{};
    size_t dcolon = text.find("::");
    auto parse_groups = [](std::string_view part, std::array<uint16_t, 8>& out, size_t& count) {
        count = 0;
        if (part.empty()) return true;
        size_t i = 0;
        while (i <= part.size()) {
            size_t j = part.find(':', i);
            std::string_view g = part.substr(i, (j == std::string_view::npos ? part.size() : j) - i);
            uint16_t v;
            if (count >= 8 || !parse_u16_hex(g, v)) return false;
            out[count++] = v;
            if (j == std::string_view::npos) break;
            i = j + 1;
        }
        return true;
    };
    std::array<uint16_t, 8> head{}, tail{};
    size_t nhead = 0, ntail = 0;
    if (dcolon == std::string_view::npos) {
        if (!parse_groups(text, head, nhead) || nhead != 8) return std::nullopt;
        groups = head;
    } else {
        if (text.find("::", dcolon + 1) != std::string_view::npos) return std::nullopt;
        if (!parse_groups(text.substr(0, dcolon), head, nhead)) return std::nullopt;
        if (!parse_groups(text.substr(dcolon + 2), tail, ntail)) return std::nullopt;
        if (nhead + ntail > 7) return std::nullopt;
        for (size_t k = 0; k < nhead; ++k) groups[k] = head[k];
        for (size_t k = 0; k < ntail; ++k) groups[8 - ntail + k] = tail[k];
    }
    uint64_t hi = 0, lo = 0;
    for (int k = 0; k < 4; ++k) hi = (hi << 16) | groups[size_t(k)];
    for (int k = 4; k < 8; ++k) lo = (lo << 16) | groups[size_t(k)];
    return IpAddress{Family::v6, hi, lo};
}

}  // namespace

std::optional<IpAddress> parse_address(std::string_view text) {
    if (text.find(':') != std::string_view::npos) return parse_v6(text);
    return parse_v4(text);
}

std::string format_address(const IpAddress& addr) {
    char buf[64];
    if (addr.family == Family::v4) {
        uint32_t v = uint32_t(addr.lo);
        std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", (v >> 24) & 0xff, (v >> 16) & 0xff,
                      (v >> 8) & 0xff, v & 0xff);
        return buf;
    }
    std::array<uint16_t, 8> g{};
    for (int k = 0; k < 4; ++k) g[size_t(k)] = uint16_t(addr.hi >> (48 - 16 * k));
    for (int k = 0; k < 4; ++k) g[size_t(4 + k)] = uint16_t(addr.lo >> (48 - 16 * k));
    // RFC 5952: compress the longest run of zero groups (length >= 2), leftmost wins.
    int best_start = -1, best_len = 0;
    for (int i = 0; i < 8;) {
        if (g[size_t(i)] != 0) { ++i; continue; }
        int j = i;
        while (j < 8 && g[size_t(j)] == 0) ++j;
        if (j - i > best_len) { best_start = i; best_len = j - i; }
        i = j;
    }
    if (best_len < 2) best_start = -1;
    std::string out;
    for (int i = 0; i < 8;) {
        if (i == best_start) {
            out += "::";
            i += best_len;
            continue;
        }
        if (!out.empty() && out.back() != ':') out += ':';
        std::snprintf(buf, sizeof buf, "%x", g[size_t(i)]);
        out += buf;
        ++i;
    }
    return out;
}

IpAddress address_plus(const IpAddress& addr, uint64_t delta) {
    IpAddress r = addr;
    uint64_t lo = r.lo + delta;
    if (lo < r.lo) ++r.hi;
    r.lo = lo;
    if (r.family == Family::v4) r.lo &= 0xffffffffull;
    return r;
}

namespace {

void mask_bits(IpAddress& addr, int bits) {
    // bits counted from the top of the 128-bit value for v6, of the low 32 for v4.
    int top = (addr.family == Family::v4) ? 32 : 128;
    int host = top - bits;
    if (host <= 0) return;
    if (addr.family == Family::v4) {
        addr.lo &= (host >= 32) ? 0 : (~0ull << host) & 0xffffffffull;
        return;
    }
    if (host >= 64) {
        addr.lo = 0;
        int h = host - 64;
        addr.hi &= (h >= 64) ? 0 : (~0ull << h);
    } else {
        addr.lo &= ~0ull << host;
    }
}

}  // namespace

bool Prefix::contains(const IpAddress& addr) const {
    if (addr.family != network.family) return false;
    IpAddress masked = addr;
    mask_bits(masked, length);
    return masked.hi == network.hi && masked.lo == network.lo;
}

bool Prefix::contains(const Prefix& other) const {
    return other.length >= length && contains(other.network);
}

std::optional<Prefix> parse_prefix(std::string_view text) {
    size_t slash = text.rfind('/');
    if (slash == std::string_view::npos) return std::nullopt;
    auto addr = parse_address(text.substr(0, slash));
    if (!addr) return std::nullopt;
    std::string_view lenpart = text.substr(slash + 1);
    unsigned len = 0;
    auto [p, ec] = std::from_chars(lenpart.data(), lenpart.data() + lenpart.size(), len);
    if (ec != std::errc() || p != lenpart.data() + lenpart.size()) return std::nullopt;
    unsigned maxlen = (addr->family == Family::v4) ? 32 : 128;
    if (len > maxlen) return std::nullopt;
    IpAddress masked = *addr;
    mask_bits(masked, int(len));
    if (masked != *addr) return std::nullopt;  // host bits set
    return Prefix{*addr, uint8_t(len)};
}

std::string format_prefix(const Prefix& prefix) {
    return format_address(prefix.network) + "/" + std::to_string(prefix.length);
}

Prefix vantage_block(const IpAddress& addr) {
    IpAddress net = addr;
    uint8_t len = (addr.family == Family::v4) ? 24 : 48;
    mask_bits(net, len);
    return Prefix{net, len};
}

}  // namespace anylab
