#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "anylab/probe.hpp"

namespace anylab {

struct CatchmentReport {
    struct Row {
        std::string site_id;
        uint64_t reply_count = 0;
        int percent = 0;  // floor(100 * count / total)
    };
    std::vector<Row> rows;  // sorted by reply_count descending
    uint64_t total = 0;
};

struct LoadEstimate {
    std::map<std::string, uint64_t> slash24_per_site;
    bool uniform_traffic_assumed = true;
};

CatchmentReport catchment_summary(const std::vector<ReplyRecord>& records);
/// Builds the report straight from per-site reply counts.
CatchmentReport catchment_report_from_counts(const std::map<std::string, uint64_t>& counts);
/// `site | count -  pct` layout.
std::string render_catchment_text(const CatchmentReport& report);
std::string render_catchment_csv(const CatchmentReport& report);

std::map<int, uint64_t> ttl_distribution(const std::vector<ReplyRecord>& records);
std::string render_ttl_csv(const std::map<int, uint64_t>& histogram);

enum class RttGroupBy { site, country, site_country };

struct RttRow {
    std::string group;
    uint64_t count = 0;
    double min = 0, median = 0, mean = 0, p95 = 0, max = 0;
};

/// Median and p95 use the nearest-rank method on the sorted values.
std::vector<RttRow> rtt_aggregate(const std::vector<ReplyRecord>& records, RttGroupBy group_by);
std::string render_rtt_csv(const std::vector<RttRow>& rows);

/// /24 networks per site under the uniform-traffic assumption.
LoadEstimate load_estimate(const std::map<Asn, std::string>& catchment_map,
                           const std::vector<HitListEntry>& hitlist);
std::string render_load_csv(const LoadEstimate& estimate);

}  // namespace anylab
