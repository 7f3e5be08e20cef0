#include "anylab/replies_csv.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace anylab {

namespace {

constexpr std::array<const char*, 7> kColumns = {"site", "time_diff", "target_ip", "anycast_ip",
                                                 "ttl",  "cc",        "asn"};

std::string header() {
    std::string h;
    for (size_t i = 0; i < kColumns.size(); ++i) {
        if (i) h += ",";
        h += kColumns[i];
    }
    return h;
}

}  // namespace

std::string format_reply_row(const ReplyRecord& r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", r.time_diff_ms);
    return r.site + "," + buf + "," + format_address(r.target_ip) + "," +
           format_address(r.anycast_ip) + "," + std::to_string(r.ttl) + "," + r.cc + "," +
           std::to_string(r.asn);
}

std::string write_replies_csv(const std::vector<ReplyRecord>& records) {
    std::vector<const ReplyRecord*> ordered;
    ordered.reserve(records.size());
    for (const auto& r : records) ordered.push_back(&r);
    std::stable_sort(ordered.begin(), ordered.end(), [](const ReplyRecord* a, const ReplyRecord* b) {
        if (a->site != b->site) return a->site < b->site;
        return a->target_ip < b->target_ip;
    });
    std::string out = header() + "\n";
    for (const ReplyRecord* r : ordered) out += format_reply_row(*r) + "\n";
    return out;
}

std::vector<ReplyRecord> read_replies_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::vector<ReplyRecord> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::istringstream ls(line);
        std::string col;
        while (std::getline(ls, col, ',')) cols.push_back(col);
        if (lineno == 1) {
            if (cols.size() != kColumns.size())
                throw ParseError(lineno, "expected " + std::to_string(kColumns.size()) + " columns");
            for (size_t i = 0; i < kColumns.size(); ++i)
                if (cols[i] != kColumns[i])
                    throw ParseError(lineno, "schema mismatch in column " + std::to_string(i + 1) +
                                                 ": expected '" + kColumns[i] + "', got '" +
                                                 cols[i] + "'");
            continue;
        }
        if (cols.size() != kColumns.size())
            throw ParseError(lineno, "expected " + std::to_string(kColumns.size()) + " columns");
        ReplyRecord r;
        r.site = cols[0];
        try {
            r.time_diff_ms = std::stod(cols[1]);
        } catch (const std::exception&) {
            throw ParseError(lineno, "bad time_diff '" + cols[1] + "'");
        }
        auto target = parse_address(cols[2]);
        if (!target) throw ParseError(lineno, "bad target_ip '" + cols[2] + "'");
        r.target_ip = *target;
        auto anycast = parse_address(cols[3]);
        if (!anycast) throw ParseError(lineno, "bad anycast_ip '" + cols[3] + "'");
        r.anycast_ip = *anycast;
        auto [p, ec] = std::from_chars(cols[4].data(), cols[4].data() + cols[4].size(), r.ttl);
        if (ec != std::errc() || p != cols[4].data() + cols[4].size())
            throw ParseError(lineno, "bad ttl '" + cols[4] + "'");
        r.cc = cols[5];
        auto [p2, ec2] = std::from_chars(cols[6].data(), cols[6].data() + cols[6].size(), r.asn);
        if (ec2 != std::errc() || p2 != cols[6].data() + cols[6].size())
            throw ParseError(lineno, "bad asn '" + cols[6] + "'");
        out.push_back(std::move(r));
    }
    if (lineno == 0) throw ParseError(1, "missing header");
    return out;
}

}  // namespace anylab
