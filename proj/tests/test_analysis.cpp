#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "anylab/analysis.hpp"

using namespace anylab;

namespace {

ReplyRecord rec(const std::string& site, double t, const std::string& cc, int ttl = 52) {
    ReplyRecord r;
    r.site = site;
    r.time_diff_ms = t;
    r.cc = cc;
    r.ttl = ttl;
    return r;
}

const std::map<std::string, uint64_t> kPublishedCounts = {
    {"us-los", 1342542}, {"uk-lnd", 1123535}, {"us-mia", 541846},
    {"fr-par", 473867},  {"au-syd", 85475},   {"jp-hnd", 321},
};

}  // namespace

TEST_CASE("catchment report reproduces the published percentages") {
    CatchmentReport report = catchment_report_from_counts(kPublishedCounts);
    CHECK(report.total == 3567586);
    REQUIRE(report.rows.size() == 6);
    CHECK(report.rows[0].site_id == "us-los");
    CHECK(report.rows[0].percent == 37);
    CHECK(report.rows[1].percent == 31);
    CHECK(report.rows[2].percent == 15);
    CHECK(report.rows[3].percent == 13);
    CHECK(report.rows[4].percent == 2);
    CHECK(report.rows[5].percent == 0);

    std::string expected =
        "# sites| replies -  percentual\n"
        "\n"
        "us-los | 1342542 -  37\n"
        "uk-lnd | 1123535 -  31\n"
        "us-mia |  541846 -  15\n"
        "fr-par |  473867 -  13\n"
        "au-syd |   85475 -   2\n"
        "jp-hnd |     321 -   0\n";
    CHECK(render_catchment_text(report) == expected);
}

TEST_CASE("catchment summary edge cases") {
    std::vector<ReplyRecord> records;
    for (int i = 0; i < 100; ++i) records.push_back(rec("nl-arn", 1.0, "NL"));
    CatchmentReport one = catchment_summary(records);
    REQUIRE(one.rows.size() == 1);
    CHECK(one.rows[0].percent == 100);

    CatchmentReport empty = catchment_summary({});
    CHECK(empty.rows.empty());
    CHECK(empty.total == 0);
    CHECK(render_catchment_text(empty) == "# sites| replies -  percentual\n\n");
    CHECK(render_catchment_csv(one) == "site,count,percent\nnl-arn,100,100\n");
}

TEST_CASE("ttl distribution") {
    CHECK(ttl_distribution({}).empty());
    std::vector<ReplyRecord> records = {rec("a-a", 1, "AU", 52), rec("a-a", 1, "AU", 52),
                                        rec("a-a", 1, "AU", 52)};
    auto hist = ttl_distribution(records);
    CHECK(hist == std::map<int, uint64_t>{{52, 3}});

    records = {rec("a-a", 1, "AU", 50), rec("a-a", 1, "AU", 50), rec("a-a", 1, "AU", 64)};
    hist = ttl_distribution(records);
    CHECK(hist == std::map<int, uint64_t>{{50, 2}, {64, 1}});
    CHECK(render_ttl_csv(hist) == "ttl,count\n50,2\n64,1\n");
}

TEST_CASE("rtt aggregation") {
    SUBCASE("single record, site x country grouping") {
        auto rows = rtt_aggregate({rec("au-syd", 97.191805, "AU")}, RttGroupBy::site_country);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].group == "au-syd/AU");
        CHECK(rows[0].count == 1);
        CHECK(rows[0].min == doctest::Approx(97.191805));
        CHECK(rows[0].median == doctest::Approx(97.191805));
        CHECK(rows[0].mean == doctest::Approx(97.191805));
        CHECK(rows[0].p95 == doctest::Approx(97.191805));
        CHECK(rows[0].max == doctest::Approx(97.191805));
    }

    SUBCASE("two values") {
        auto rows = rtt_aggregate({rec("au-syd", 10.0, "AU"), rec("au-syd", 20.0, "AU")},
                                  RttGroupBy::site);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].mean == doctest::Approx(15.0));
        CHECK(rows[0].min == doctest::Approx(10.0));
        CHECK(rows[0].max == doctest::Approx(20.0));
        CHECK(rows[0].median == doctest::Approx(10.0));  // nearest rank
        CHECK(rows[0].p95 == doctest::Approx(20.0));
    }

    SUBCASE("empty input") { CHECK(rtt_aggregate({}, RttGroupBy::country).empty()); }

    SUBCASE("permutation invariance") {
        std::vector<ReplyRecord> records;
        std::mt19937_64 rng(4);
        for (int i = 0; i < 200; ++i)
            records.push_back(rec(i % 2 ? "aa-x" : "bb-y", double(rng() % 10000) / 100.0,
                                  i % 3 ? "NL" : "BR"));
        auto base = rtt_aggregate(records, RttGroupBy::site_country);
        for (int round = 0; round < 5; ++round) {
            std::shuffle(records.begin(), records.end(), rng);
            auto rows = rtt_aggregate(records, RttGroupBy::site_country);
            REQUIRE(rows.size() == base.size());
            for (size_t i = 0; i < rows.size(); ++i) {
                CHECK(rows[i].group == base[i].group);
                CHECK(rows[i].mean == doctest::Approx(base[i].mean));
                CHECK(rows[i].median == doctest::Approx(base[i].median));
                CHECK(rows[i].p95 == doctest::Approx(base[i].p95));
            }
        }
    }
}

TEST_CASE("load estimate") {
    std::map<Asn, std::string> cmap = {{10, "aa-x"}, {20, "aa-x"}, {30, "bb-y"}};
    std::vector<HitListEntry> hitlist;
    for (int i = 0; i < 10; ++i) {
        HitListEntry e;
        e.address = *parse_address(std::to_string(10 + i) + ".0.0.1");
        e.cc = "NL";
        e.asn = i < 6 ? (i % 2 ? 10u : 20u) : 30u;
        hitlist.push_back(e);
    }
    LoadEstimate est = load_estimate(cmap, hitlist);
    CHECK(est.slash24_per_site.at("aa-x") == 6);
    CHECK(est.slash24_per_site.at("bb-y") == 4);
    CHECK(est.uniform_traffic_assumed);
    CHECK(render_load_csv(est) == "site,count,percent\naa-x,6,60\nbb-y,4,40\n");

    LoadEstimate empty = load_estimate(cmap, {});
    for (const auto& [site, count] : empty.slash24_per_site) CHECK(count == 0);

    std::map<Asn, std::string> single = {{10, "aa-x"}};
    LoadEstimate all = load_estimate(single, hitlist);
    uint64_t total = 0;
    for (const auto& [site, count] : all.slash24_per_site) total += count;
    CHECK(total == 3);  // only the mapped ASes count
}

TEST_CASE("conservation laws over random record sets") {
    std::mt19937_64 rng(12);
    for (int round = 0; round < 50; ++round) {
        std::vector<ReplyRecord> records;
        int n = int(rng() % 400);
        for (int i = 0; i < n; ++i)
            records.push_back(rec("s" + std::to_string(rng() % 7) + "-x",
                                  double(rng() % 1000) / 7.0, "NL", int(40 + rng() % 25)));
        auto hist = ttl_distribution(records);
        uint64_t hist_total = 0;
        for (const auto& [ttl, count] : hist) hist_total += count;
        CatchmentReport report = catchment_summary(records);
        uint64_t site_total = 0;
        int percent_sum = 0;
        for (const auto& row : report.rows) {
            site_total += row.reply_count;
            percent_sum += row.percent;
        }
        CHECK(hist_total == records.size());
        CHECK(site_total == records.size());
        CHECK(report.total == records.size());
        if (!report.rows.empty()) {
            CHECK(percent_sum <= 100);
            CHECK(percent_sum >= 100 - int(report.rows.size() - 1));
        }
    }
}
