#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "anylab/prefix.hpp"

using namespace anylab;

TEST_CASE("v4 parse and format") {
    auto a = parse_address("145.100.118.1");
    REQUIRE(a.has_value());
    CHECK(a->family == Family::v4);
    CHECK(format_address(*a) == "145.100.118.1");
    CHECK(!parse_address("145.100.118"));
    CHECK(!parse_address("145.100.118.256"));
    CHECK(!parse_address("145.100.118.1.2"));
}

TEST_CASE("v6 parse and format") {
    auto a = parse_address("2001:610:9000::");
    REQUIRE(a.has_value());
    CHECK(a->family == Family::v6);
    CHECK(format_address(*a) == "2001:610:9000::");
    CHECK(format_address(*parse_address("2001:610:900::")) == "2001:610:900::");
    CHECK(format_address(*parse_address("::1")) == "::1");
    CHECK(format_address(*parse_address("2001:0:0:1:0:0:0:1")) == "2001:0:0:1::1");
    CHECK(!parse_address("2001::610::1"));
    CHECK(!parse_address("1:2:3:4:5:6:7:8:9"));
}

TEST_CASE("prefix parse rejects host bits") {
    CHECK(parse_prefix("145.100.118.0/23").has_value());
    CHECK(!parse_prefix("145.100.118.1/23"));
    CHECK(!parse_prefix("145.100.118.0/33"));
    CHECK(!parse_prefix("145.100.118.0"));
    CHECK(parse_prefix("2001:610:900::/40").has_value());
}

TEST_CASE("containment and first host") {
    Prefix p = *parse_prefix("145.100.118.0/23");
    CHECK(p.contains(*parse_address("145.100.118.7")));
    CHECK(p.contains(*parse_address("145.100.119.255")));
    CHECK(!p.contains(*parse_address("145.100.120.0")));
    CHECK(p.contains(*parse_prefix("145.100.119.0/24")));
    CHECK(!p.contains(*parse_prefix("145.100.0.0/16")));
    CHECK(format_address(p.first_host()) == "145.100.118.1");
    CHECK(format_address(parse_prefix("145.100.119.0/24")->first_host()) == "145.100.119.1");
}

TEST_CASE("vantage block mapping") {
    CHECK(vantage_block(*parse_address("1.1.1.2")) == *parse_prefix("1.1.1.0/24"));
    CHECK(vantage_block(*parse_address("1.1.1.200")) == *parse_prefix("1.1.1.0/24"));
    CHECK(vantage_block(*parse_address("2001:610:900::42")) == *parse_prefix("2001:610:900::/48"));
}

TEST_CASE("format round-trips random addresses") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 2000; ++i) {
        IpAddress a;
        if (i % 2) {
            a = IpAddress{Family::v4, 0, rng() & 0xffffffffull};
        } else {
            a = IpAddress{Family::v6, rng(), rng()};
        }
        auto back = parse_address(format_address(a));
        REQUIRE(back.has_value());
        CHECK(*back == a);
    }
}
