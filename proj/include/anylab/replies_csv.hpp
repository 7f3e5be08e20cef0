#pragma once

#include <string>
#include <vector>

#include "anylab/probe.hpp"

namespace anylab {

/// Measurement record schema: `site,time_diff,target_ip,anycast_ip,ttl,cc,asn`.
/// time_diff carries exactly 6 decimals; rows are written in canonical
/// (site, target_ip) order so write/read/write is byte-identical.
std::string write_replies_csv(const std::vector<ReplyRecord>& records);

/// Throws ParseError naming the offending column on a schema mismatch.
std::vector<ReplyRecord> read_replies_csv(const std::string& text);

std::string format_reply_row(const ReplyRecord& record);

}  // namespace anylab
