#include "anylab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace anylab {

CatchmentReport catchment_report_from_counts(const std::map<std::string, uint64_t>& counts) {
    CatchmentReport report;
    for (const auto& [site, count] : counts) {
        report.rows.push_back({site, count, 0});
        report.total += count;
    }
    if (report.total > 0)
        for (auto& row : report.rows)
            row.percent = int(row.reply_count * 100 / report.total);
    std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
        if (a.reply_count != b.reply_count) return a.reply_count > b.reply_count;
        return a.site_id < b.site_id;
    });
    return report;
}

CatchmentReport catchment_summary(const std::vector<ReplyRecord>& records) {
    std::map<std::string, uint64_t> counts;
    for (const auto& r : records) ++counts[r.site];
    return catchment_report_from_counts(counts);
}

std::string render_catchment_text(const CatchmentReport& report) {
    std::string out = "# sites| replies -  percentual\n\n";
    char buf[128];
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof buf, "%s | %7llu - %3d\n", row.site_id.c_str(),
                      (unsigned long long)row.reply_count, row.percent);
        out += buf;
    }
    return out;
}

std::string render_catchment_csv(const CatchmentReport& report) {
    std::string out = "site,count,percent\n";
    for (const auto& row : report.rows)
        out += row.site_id + "," + std::to_string(row.reply_count) + "," +
               std::to_string(row.percent) + "\n";
    return out;
}

std::map<int, uint64_t> ttl_distribution(const std::vector<ReplyRecord>& records) {
    std::map<int, uint64_t> out;
    for (const auto& r : records) ++out[r.ttl];
    return out;
}

std::string render_ttl_csv(const std::map<int, uint64_t>& histogram) {
    std::string out = "ttl,count\n";
    for (const auto& [ttl, count] : histogram)
        out += std::to_string(ttl) + "," + std::to_string(count) + "\n";
    return out;
}

namespace {

double nearest_rank(const std::vector<double>& sorted, double percentile) {
    // 1-indexed ceil(p/100 * N); callers guarantee non-empty input.
    size_t n = sorted.size();
    size_t rank = size_t(std::max(1.0, std::ceil(percentile / 100.0 * double(n))));
    return sorted[std::min(rank, n) - 1];
}

}  // namespace

std::vector<RttRow> rtt_aggregate(const std::vector<ReplyRecord>& records, RttGroupBy group_by) {
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : records) {
        std::string key;
        switch (group_by) {
            case RttGroupBy::site: key = r.site; break;
            case RttGroupBy::country: key = r.cc; break;
            case RttGroupBy::site_country: key = r.site + "/" + r.cc; break;
        }
        groups[key].push_back(r.time_diff_ms);
    }
    std::vector<RttRow> rows;
    rows.reserve(groups.size());
    for (auto& [key, values] : groups) {
        std::sort(values.begin(), values.end());
        RttRow row;
        row.group = key;
        row.count = values.size();
        row.min = values.front();
        row.max = values.back();
        row.median = nearest_rank(values, 50.0);
        row.p95 = nearest_rank(values, 95.0);
        double sum = 0;
        for (double v : values) sum += v;
        row.mean = sum / double(values.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_rtt_csv(const std::vector<RttRow>& rows) {
    std::string out = "group,count,min,median,mean,p95,max\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%llu,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.group.c_str(),
                      (unsigned long long)r.count, r.min, r.median, r.mean, r.p95, r.max);
        out += buf;
    }
    return out;
}

LoadEstimate load_estimate(const std::map<Asn, std::string>& catchment_map,
                           const std::vector<HitListEntry>& hitlist) {
    LoadEstimate est;
    for (const auto& [asn, site] : catchment_map) est.slash24_per_site.emplace(site, 0);
    for (const auto& e : hitlist) {
        if (!e.routable) continue;
        auto it = catchment_map.find(e.asn);
        if (it == catchment_map.end()) continue;
        ++est.slash24_per_site[it->second];
    }
    return est;
}

std::string render_load_csv(const LoadEstimate& estimate) {
    uint64_t total = 0;
    for (const auto& [site, count] : estimate.slash24_per_site) total += count;
    std::vector<std::pair<std::string, uint64_t>> rows(estimate.slash24_per_site.begin(),
                                                       estimate.slash24_per_site.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::string out = "site,count,percent\n";
    for (const auto& [site, count] : rows) {
        uint64_t pct = total ? count * 100 / total : 0;
        out += site + "," + std::to_string(count) + "," + std::to_string(pct) + "\n";
    }
    return out;
}

}  // namespace anylab
