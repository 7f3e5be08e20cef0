#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "anylab/probe.hpp"
#include "anylab/topology.hpp"

using namespace anylab;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("anylab_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

CliResult run_cli(const TempDir& dir, const std::string& args, const std::string& env = "") {
    fs::path out = dir.path / "stdout.txt";
    fs::path err = dir.path / "stderr.txt";
    std::string cmd = "cd " + dir.path.string() + " && " + (env.empty() ? "" : env + " ") +
                      ANYLAB_CLI_PATH + " " + args + " > " + out.string() + " 2> " + err.string();
    int rc = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

void write_hitlist(const fs::path& p, const AsTopology& topo, int count, uint64_t seed) {
    std::ofstream out(p);
    out << "address,cc,asn\n";
    for (const auto& e : synth_hitlist(topo, count, seed))
        out << format_address(e.address) << "," << e.cc << "," << e.asn << "\n";
}

}  // namespace

TEST_CASE("help exits zero everywhere") {
    TempDir dir;
    for (const char* args : {"--help", "topo --help", "ctl --help", "scenario --help",
                             "measure --help", "report --help"}) {
        CliResult r = run_cli(dir, args);
        CHECK(r.exit_code == 0);
        CHECK(!r.out.empty());
    }
}

TEST_CASE("usage errors exit 2") {
    TempDir dir;
    CHECK(run_cli(dir, "ctl -4 -A -W -t br-poa -r 145.100.118.0/23").exit_code == 2);
    CHECK(run_cli(dir, "ctl -4 -t br-poa -r 145.100.118.0/23").exit_code == 2);   // no action
    CHECK(run_cli(dir, "ctl -A -t br-poa -r 145.100.118.0/23").exit_code == 2);   // no family
    CHECK(run_cli(dir, "ctl -4 -W -t br-poa -r 145.100.118.0/23 -P 3").exit_code == 2);
    CHECK(run_cli(dir, "nonsense").exit_code == 2);
}

TEST_CASE("announce, status and withdraw through the state file") {
    TempDir dir;
    CliResult r =
        run_cli(dir, "ctl -4 -A -t br-poa -r 145.100.118.0/23 -P 20 --fixture --stubs 20");
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir.path / "anylab.state"));

    r = run_cli(dir, "ctl --status");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("site br-poa") != std::string::npos);
    CHECK(r.out.find("prepend=20") != std::string::npos);

    // Domain error: capability missing at nl-ens.
    r = run_cli(dir, "ctl -4 -A -t nl-ens -r 145.100.118.0/23 -C noPeer");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("noPeer") != std::string::npos);

    r = run_cli(dir, "ctl -4 -W -t br-poa -r 145.100.118.0/23");
    CHECK(r.exit_code == 0);
    r = run_cli(dir, "ctl --status");
    CHECK(r.out.find("no active announcements") != std::string::npos);
}

TEST_CASE("topo fixture, validate and show") {
    TempDir dir;
    CliResult r = run_cli(dir, "topo fixture --stubs 25 -o topo.txt");
    CHECK(r.exit_code == 0);
    REQUIRE(fs::exists(dir.path / "topo.txt"));

    r = run_cli(dir, "topo validate topo.txt");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("ok") != std::string::npos);
    CHECK(r.out.find("note:") != std::string::npos);

    r = run_cli(dir, "topo show topo.txt");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("sites: 12") != std::string::npos);

    std::ofstream bad(dir.path / "bad.txt");
    bad << "as 10 a site=aa-org\nas 10 b\n";
    bad.close();
    r = run_cli(dir, "topo validate bad.txt");
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("duplicate asn 10") != std::string::npos);
}

TEST_CASE("scenario run prints outcomes and snapshot count") {
    TempDir dir;
    {
        std::ofstream sc(dir.path / "plan.scn");
        sc << "1 announce us-los 145.100.118.0/24\n"
           << "2 announce fr-par 145.100.119.0/24\n";
    }
    CliResult r = run_cli(dir, "scenario run plan.scn --stubs 20 --snapshots snaps");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("snapshots: 2") != std::string::npos);
    CHECK(fs::exists(dir.path / "snaps/snapshot-2.csv"));

    {
        std::ofstream sc(dir.path / "bad.scn");
        sc << "1 announce us-los 145.100.118.0/24\n"
           << "2 announce xx-nope 145.100.119.0/24\n";
    }
    r = run_cli(dir, "scenario run bad.scn --stubs 20");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("command 2 failed") != std::string::npos);
}

TEST_CASE("measure and report round trip, byte-stable across runs") {
    TempDir dir;
    AsTopology topo = reference_fixture(30, 1);
    write_hitlist(dir.path / "hl.csv", topo, 200, 3);

    std::string measure_args =
        "measure run --hitlist hl.csv --pingers nl-ens,us-los --fixture --stubs 30 "
        "--announce-all -o ";
    CHECK(run_cli(dir, measure_args + "out1.csv").exit_code == 0);
    CHECK(run_cli(dir, measure_args + "out2.csv").exit_code == 0);
    std::string csv1 = slurp(dir.path / "out1.csv");
    CHECK(csv1 == slurp(dir.path / "out2.csv"));
    CHECK(csv1.rfind("site,time_diff,target_ip,anycast_ip,ttl,cc,asn\n", 0) == 0);

    CliResult rep = run_cli(dir, "report catchment out1.csv");
    CHECK(rep.exit_code == 0);
    CHECK(rep.out.rfind("# sites| replies -  percentual\n", 0) == 0);
    CHECK(run_cli(dir, "report catchment out1.csv").out == rep.out);

    CHECK(run_cli(dir, "report catchment out1.csv --csv").out.rfind("site,count,percent\n", 0) == 0);
    CHECK(run_cli(dir, "report ttl out1.csv").out.rfind("ttl,count\n", 0) == 0);
    CHECK(run_cli(dir, "report rtt out1.csv --by site-country")
              .out.rfind("group,count,min,median,mean,p95,max\n", 0) == 0);
    CHECK(run_cli(dir, "report load out1.csv").out.rfind("site,count,percent\n", 0) == 0);

    CliResult est = run_cli(dir, "measure estimate --hitlist hl.csv --pingers nl-ens");
    CHECK(est.exit_code == 0);
    CHECK(est.out == "1\n");  // 200 entries at 3612 pps
}

TEST_CASE("measure honors the state file and prefix LPM") {
    TempDir dir;
    AsTopology topo = reference_fixture(20, 1);
    write_hitlist(dir.path / "hl.csv", topo, 50, 4);
    CHECK(run_cli(dir, "ctl -4 -A -t us-los -r 145.100.118.0/24 --fixture --stubs 20").exit_code == 0);
    CHECK(run_cli(dir, "ctl -4 -A -t fr-par -r 145.100.119.0/24").exit_code == 0);

    CliResult r = run_cli(
        dir, "measure run --hitlist hl.csv --pingers nl-ens --prefix 145.100.118.0/24 -o low.csv");
    CHECK(r.exit_code == 0);
    std::string low = slurp(dir.path / "low.csv");
    CHECK(low.find("us-los,") != std::string::npos);
    CHECK(low.find("fr-par,") == std::string::npos);
    CHECK(low.find("145.100.118.1") != std::string::npos);

    r = run_cli(dir,
                "measure run --hitlist hl.csv --pingers nl-ens --prefix 145.100.119.0/24 -o hi.csv");
    CHECK(r.exit_code == 0);
    std::string hi = slurp(dir.path / "hi.csv");
    CHECK(hi.find("fr-par,") != std::string::npos);
    CHECK(hi.find("us-los,") == std::string::npos);
    CHECK(hi.find("145.100.119.1") != std::string::npos);
}

TEST_CASE("workers flag leaves measurement output unchanged") {
    TempDir dir;
    AsTopology topo = reference_fixture(15, 1);
    write_hitlist(dir.path / "hl.csv", topo, 120, 6);
    std::string base =
        "measure run --hitlist hl.csv --pingers uk-lnd --fixture --stubs 15 --announce-all ";
    CHECK(run_cli(dir, base + "-o a.csv").exit_code == 0);
    CHECK(run_cli(dir, "--workers 4 " + base + "-o b.csv").exit_code == 0);
    CHECK(slurp(dir.path / "a.csv") == slurp(dir.path / "b.csv"));
}

TEST_CASE("seed env var mirrors --seed") {
    TempDir dir;
    CHECK(run_cli(dir, "--seed 7 topo fixture --stubs 12 -o a.txt").exit_code == 0);
    CHECK(run_cli(dir, "topo fixture --stubs 12 -o b.txt", "ANYLAB_SEED=7").exit_code == 0);
    CHECK(slurp(dir.path / "a.txt") == slurp(dir.path / "b.txt"));
    CHECK(run_cli(dir, "--seed 8 topo fixture --stubs 12 -o c.txt").exit_code == 0);
    CHECK(slurp(dir.path / "a.txt") != slurp(dir.path / "c.txt"));
}
