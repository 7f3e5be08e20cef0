// anylab: a desk-scale anycast laboratory. Announce prefixes from simulated
// sites, map their catchments with hit-list probing, and report on the data.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "anylab/analysis.hpp"
#include "anylab/controller.hpp"
#include "anylab/probe.hpp"
#include "anylab/replies_csv.hpp"
#include "anylab/routing.hpp"
#include "anylab/topology.hpp"

using namespace anylab;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write " + path);
    out << content;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) std::cout << content;
    else write_file(out_path, content);
}

struct TopoSource {
    std::string file;     // topology file path, when given
    int stubs = 200;
    uint64_t seed = 1;

    std::string state_line() const {
        if (!file.empty()) return "topology file " + file;
        return "topology fixture stubs=" + std::to_string(stubs) + " seed=" + std::to_string(seed);
    }
    std::shared_ptr<const AsTopology> build() const {
        if (!file.empty())
            return std::make_shared<const AsTopology>(load_topology(read_file(file)));
        return std::make_shared<const AsTopology>(reference_fixture(stubs, seed));
    }
};

// The state file is the event log plus the topology source: replaying the
// log reconstructs the announcement set.
struct PersistedState {
    TopoSource source;
    std::shared_ptr<const AsTopology> topology;
    std::unique_ptr<ControlState> state;
};

PersistedState load_state(const std::string& path, const TopoSource& fallback) {
    PersistedState ps;
    if (!std::filesystem::exists(path)) {
        ps.source = fallback;
        ps.topology = ps.source.build();
        ps.state = std::make_unique<ControlState>(ps.topology);
        return ps;
    }
    std::istringstream in(read_file(path));
    std::string line;
    std::vector<LogEntry> log;
    bool topo_seen = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        if (kind == "topology") {
            std::string mode;
            ls >> mode;
            if (mode == "file") {
                ls >> ps.source.file;
            } else if (mode == "fixture") {
                std::string tok;
                while (ls >> tok) {
                    if (tok.rfind("stubs=", 0) == 0) ps.source.stubs = std::stoi(tok.substr(6));
                    else if (tok.rfind("seed=", 0) == 0) ps.source.seed = std::stoull(tok.substr(5));
                }
            } else {
                throw ParseError(lineno, "unknown topology mode '" + mode + "'");
            }
            topo_seen = true;
        } else if (kind == "log") {
            LogEntry e;
            if (!(ls >> e.timestamp)) throw ParseError(lineno, "bad log timestamp");
            std::string rest;
            std::getline(ls, rest);
            size_t arrow = rest.rfind(" -> ");
            if (arrow == std::string::npos) throw ParseError(lineno, "bad log entry");
            e.command = rest.substr(1, arrow - 1);
            e.outcome = rest.substr(arrow + 4);
            log.push_back(std::move(e));
        } else {
            throw ParseError(lineno, "unknown state record '" + kind + "'");
        }
    }
    if (!topo_seen) throw DomainError("state file " + path + " lacks a topology line");
    ps.topology = ps.source.build();
    ps.state = std::make_unique<ControlState>(replay_log(ps.topology, log));
    return ps;
}

void save_state(const std::string& path, const PersistedState& ps) {
    std::ostringstream out;
    out << ps.source.state_line() << "\n";
    for (const auto& e : ps.state->log())
        out << "log " << e.timestamp << " " << e.command << " -> " << e.outcome << "\n";
    write_file(path, out.str());
}

Prefix default_prefix(const AsTopology& topo, Family family) {
    for (const auto& p : topo.anycast_prefixes)
        if (p.family() == family) return p;
    throw DomainError("topology declares no anycast prefix for the requested family");
}

std::vector<std::string> split_csv_list(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(item);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anylab: anycast routing, traffic-engineering and catchment laboratory"};
    app.require_subcommand(1);

    uint64_t seed = 1;
    app.add_option("--seed", seed, "random seed for fixture construction")
        ->envname("ANYLAB_SEED")
        ->capture_default_str();
    int workers = 1;
    app.add_option("--workers", workers, "worker threads (output is identical for any count)")
        ->capture_default_str();

    // topo ------------------------------------------------------------------
    auto* topo_cmd = app.add_subcommand("topo", "build, inspect and validate topologies");
    topo_cmd->require_subcommand(1);

    auto* topo_fixture = topo_cmd->add_subcommand("fixture", "emit the built-in 12-site topology");
    int fixture_stubs = 200;
    std::string fixture_out;
    topo_fixture->add_option("--stubs", fixture_stubs, "stub client AS count")->capture_default_str();
    topo_fixture->add_option("-o,--output", fixture_out, "write to file instead of stdout");

    auto* topo_validate = topo_cmd->add_subcommand("validate", "check a topology file");
    std::string validate_path;
    topo_validate->add_option("file", validate_path, "topology file")->required();

    auto* topo_show = topo_cmd->add_subcommand("show", "summarize a topology file");
    std::string show_path;
    topo_show->add_option("file", show_path, "topology file")->required();

    // ctl -------------------------------------------------------------------
    auto* ctl = app.add_subcommand("ctl", "announce, withdraw and inspect site announcements");
    bool flag_v4 = false, flag_v6 = false, flag_announce = false, flag_withdraw = false;
    bool flag_status = false, flag_reverse = false;
    std::string ctl_site, ctl_prefix, ctl_keep, ctl_state = "anylab.state", ctl_topo;
    bool ctl_fixture = false;
    int ctl_prepend = 0, ctl_n = 0, ctl_stubs = 200;
    std::vector<std::string> ctl_communities;
    ctl->add_flag("-4", flag_v4, "IPv4 prefix");
    ctl->add_flag("-6", flag_v6, "IPv6 prefix");
    ctl->add_flag("-A", flag_announce, "announce the prefix at the site");
    ctl->add_flag("-W", flag_withdraw, "withdraw the prefix from the site");
    ctl->add_flag("--status", flag_status, "print the active configuration and export verdicts");
    ctl->add_flag("--reverse-prepend", flag_reverse, "prepend at every announcing site except --keep");
    ctl->add_option("-t,--site", ctl_site, "site identifier (e.g. br-poa)");
    ctl->add_option("-r,--prefix", ctl_prefix, "prefix (CIDR)");
    ctl->add_option("-P,--prepend", ctl_prepend, "prepend count");
    ctl->add_option("-C,--community", ctl_communities, "community spec (repeatable)");
    ctl->add_option("--keep", ctl_keep, "site spared by --reverse-prepend");
    ctl->add_option("--n", ctl_n, "prepend amount for --reverse-prepend");
    ctl->add_option("--state", ctl_state, "state file")->capture_default_str();
    ctl->add_option("--topo", ctl_topo, "topology file backing a fresh state");
    ctl->add_flag("--fixture", ctl_fixture, "back a fresh state with the built-in fixture");
    ctl->add_option("--stubs", ctl_stubs, "fixture stub count for a fresh state")
        ->capture_default_str();

    // scenario --------------------------------------------------------------
    auto* scenario = app.add_subcommand("scenario", "replay a timestamped command script");
    auto* scenario_run = scenario->add_subcommand("run", "run a scenario file");
    std::string scenario_file, scenario_topo, scenario_snapshots, scenario_state;
    int scenario_stubs = 200;
    scenario_run->add_option("file", scenario_file, "scenario script")->required();
    scenario_run->add_option("--topo", scenario_topo, "topology file");
    scenario_run->add_option("--stubs", scenario_stubs, "fixture stub count")->capture_default_str();
    scenario_run->add_option("--snapshots", scenario_snapshots,
                             "directory for per-mutation RIB csv dumps");
    scenario_run->add_option("--state", scenario_state, "persist the final state to this file");

    // measure ---------------------------------------------------------------
    auto* measure = app.add_subcommand("measure", "hit-list probing over the simulated data plane");
    auto* measure_run = measure->add_subcommand("run", "run a measurement round");
    std::string m_hitlist, m_pingers, m_prefix, m_state = "anylab.state", m_topo, m_out;
    double m_rate = 3612.0;
    bool m_fixture = false, m_announce_all = false;
    int m_stubs = 200;
    measure_run->add_option("--hitlist", m_hitlist, "hit list csv (address,cc,asn)")->required();
    measure_run->add_option("--pingers", m_pingers, "comma-separated pinger sites")->required();
    measure_run->add_option("--rate", m_rate, "probes per second per pinger")->capture_default_str();
    measure_run->add_option("--prefix", m_prefix, "anycast prefix to measure");
    measure_run->add_option("--state", m_state, "state file with announcements")->capture_default_str();
    measure_run->add_option("--topo", m_topo, "topology file (with --announce-all)");
    measure_run->add_flag("--fixture", m_fixture, "use the built-in fixture (with --announce-all)");
    measure_run->add_option("--stubs", m_stubs, "fixture stub count")->capture_default_str();
    measure_run->add_flag("--announce-all", m_announce_all,
                          "announce the prefix at every site instead of reading a state file");
    measure_run->add_option("-o,--output", m_out, "write replies csv to file instead of stdout");

    auto* measure_estimate = measure->add_subcommand("estimate", "estimate a round's duration");
    std::string e_hitlist, e_pingers;
    double e_rate = 3612.0;
    measure_estimate->add_option("--hitlist", e_hitlist, "hit list csv")->required();
    measure_estimate->add_option("--pingers", e_pingers, "comma-separated pinger sites")->required();
    measure_estimate->add_option("--rate", e_rate, "probes per second per pinger")
        ->capture_default_str();

    // report ----------------------------------------------------------------
    auto* report = app.add_subcommand("report", "turn replies csv into the analysis reports");
    auto* rep_catchment = report->add_subcommand("catchment", "per-site reply counts and percents");
    std::string rc_file;
    bool rc_csv = false;
    rep_catchment->add_option("file", rc_file, "replies csv")->required();
    rep_catchment->add_flag("--csv", rc_csv, "machine-readable output");

    auto* rep_ttl = report->add_subcommand("ttl", "ttl histogram");
    std::string rt_file;
    rep_ttl->add_option("file", rt_file, "replies csv")->required();

    auto* rep_rtt = report->add_subcommand("rtt", "latency aggregation");
    std::string rr_file, rr_by = "site";
    rep_rtt->add_option("file", rr_file, "replies csv")->required();
    rep_rtt->add_option("--by", rr_by, "site | country | site-country")->capture_default_str();

    auto* rep_load = report->add_subcommand("load", "per-site /24 load estimate");
    std::string rl_file;
    rep_load->add_option("file", rl_file, "replies csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (topo_fixture->parsed()) {
            emit(fixture_out, serialize_topology(reference_fixture(fixture_stubs, seed)));
            return 0;
        }
        if (topo_validate->parsed()) {
            AsTopology topo = parse_topology(read_file(validate_path));
            auto violations = validate(topo);
            for (const auto& v : violations) std::cout << "violation: " << v << "\n";
            for (const auto& n : topo.notes) std::cout << "note: " << n << "\n";
            if (violations.empty()) std::cout << "ok\n";
            return violations.empty() ? 0 : 1;
        }
        if (topo_show->parsed()) {
            AsTopology topo = load_topology(read_file(show_path));
            std::cout << "nodes: " << topo.nodes.size() << "\nlinks: " << topo.links.size()
                      << "\nsites: " << topo.sites.size() << "\n";
            for (const auto& p : topo.anycast_prefixes)
                std::cout << "anycast prefix: " << format_prefix(p) << "\n";
            for (const auto& s : topo.sites) {
                std::cout << "site " << s.site_id << " as " << s.host_asn << " caps ";
                for (size_t i = 0; i < s.te_capabilities.size(); ++i) {
                    if (i) std::cout << ",";
                    std::cout << policy_name(s.te_capabilities[i]);
                }
                std::cout << "\n";
            }
            for (const auto& n : topo.notes) std::cout << "note: " << n << "\n";
            return 0;
        }

        if (ctl->parsed()) {
            int actions = int(flag_announce) + int(flag_withdraw) + int(flag_status) + int(flag_reverse);
            if (actions != 1)
                throw CLI::ValidationError("ctl", "exactly one of -A, -W, --status, --reverse-prepend");
            if (flag_announce && flag_withdraw)
                throw CLI::ValidationError("ctl", "-A and -W are mutually exclusive");
            if (ctl_prepend != 0 && !flag_announce)
                throw CLI::ValidationError("ctl", "-P requires -A");
            if (!ctl_prefix.empty() && (int(flag_v4) + int(flag_v6)) != 1)
                throw CLI::ValidationError("ctl", "-r requires exactly one of -4 / -6");

            TopoSource fallback;
            fallback.stubs = ctl_stubs;
            fallback.seed = seed;
            fallback.file = ctl_topo;
            PersistedState ps = load_state(ctl_state, fallback);

            if (flag_status) {
                std::cout << ps.state->status();
                return 0;
            }
            auto need_prefix = [&]() -> Prefix {
                if (ctl_prefix.empty()) throw CLI::ValidationError("ctl", "-r <prefix> is required");
                auto p = parse_prefix(ctl_prefix);
                if (!p) throw DomainError("malformed prefix '" + ctl_prefix + "'");
                return *p;
            };
            if (flag_announce || flag_withdraw) {
                if (ctl_site.empty()) throw CLI::ValidationError("ctl", "-t <site> is required");
                Prefix prefix = need_prefix();
                Family family = flag_v6 ? Family::v6 : Family::v4;
                if (flag_announce) {
                    std::vector<Community> communities;
                    for (const auto& spec_text : ctl_communities)
                        for (const auto& one : split_csv_list(spec_text)) {
                            auto c = parse_community(one);
                            if (!c) throw DomainError("bad community spec '" + one + "'");
                            communities.push_back(*c);
                        }
                    ps.state->announce(ctl_site, prefix, family, ctl_prepend, communities);
                } else {
                    ps.state->withdraw(ctl_site, prefix);
                }
            } else if (flag_reverse) {
                if (ctl_keep.empty()) throw CLI::ValidationError("ctl", "--keep <site> is required");
                if (ctl_n < 1) throw CLI::ValidationError("ctl", "--n must be >= 1");
                ps.state->reverse_prepend(need_prefix(), ctl_keep, ctl_n);
            }
            save_state(ctl_state, ps);
            std::cerr << ps.state->log().back().command << " -> "
                      << ps.state->log().back().outcome << "\n";
            return 0;
        }

        if (scenario_run->parsed()) {
            TopoSource source;
            source.file = scenario_topo;
            source.stubs = scenario_stubs;
            source.seed = seed;
            auto topo = source.build();
            ControlState state(topo);
            auto script = parse_scenario(read_file(scenario_file));
            ScenarioResult result = run_scenario(state, script);
            for (const auto& e : state.log())
                std::cout << e.timestamp << " " << e.command << " -> " << e.outcome << "\n";
            std::cout << "snapshots: " << result.snapshots.size() << "\n";
            if (!scenario_snapshots.empty()) {
                std::filesystem::create_directories(scenario_snapshots);
                for (size_t i = 0; i < result.snapshots.size(); ++i)
                    write_file(scenario_snapshots + "/snapshot-" + std::to_string(i + 1) + ".csv",
                               rib_to_csv(result.snapshots[i]));
            }
            if (!scenario_state.empty()) {
                PersistedState ps;
                ps.source = source;
                ps.topology = topo;
                ps.state = std::make_unique<ControlState>(std::move(state));
                save_state(scenario_state, ps);
            }
            if (result.failed_index) {
                std::cerr << "command " << *result.failed_index << " failed: " << result.error
                          << "\n";
                return 1;
            }
            return 0;
        }

        if (measure_run->parsed() || measure_estimate->parsed()) {
            bool estimating = measure_estimate->parsed();
            std::string hitlist_path = estimating ? e_hitlist : m_hitlist;
            std::string pinger_list = estimating ? e_pingers : m_pingers;
            double rate = estimating ? e_rate : m_rate;

            std::shared_ptr<const AsTopology> topo;
            std::unique_ptr<RibSet> rib;
            if (!estimating && m_announce_all) {
                TopoSource source;
                source.file = m_topo;
                source.stubs = m_stubs;
                source.seed = seed;
                if (!m_fixture && m_topo.empty())
                    throw CLI::ValidationError("measure", "--announce-all needs --fixture or --topo");
                topo = source.build();
                Prefix prefix = m_prefix.empty() ? default_prefix(*topo, Family::v4)
                                                 : *parse_prefix(m_prefix);
                std::vector<Announcement> anns;
                for (const auto& site : topo->sites) {
                    Announcement a;
                    a.site_id = site.site_id;
                    a.prefix = prefix;
                    anns.push_back(a);
                }
                rib = std::make_unique<RibSet>(propagate(topo, anns));
            } else {
                TopoSource fallback;
                fallback.seed = seed;
                PersistedState ps = load_state(estimating ? "anylab.state" : m_state, fallback);
                topo = ps.topology;
                if (!estimating) rib = std::make_unique<RibSet>(ps.state->ribs());
            }

            MeasurementPlan plan;
            plan.hitlist = load_hitlist(read_file(hitlist_path), *topo);
            plan.pinger_sites = split_csv_list(pinger_list);
            plan.rate_pps = rate;
            if (estimating) {
                if (auto warning = pace_check(plan)) std::cerr << "advisory: " << *warning << "\n";
                std::cout << estimate_duration_seconds(plan) << "\n";
                return 0;
            }
            Prefix prefix;
            if (!m_prefix.empty()) {
                auto p = parse_prefix(m_prefix);
                if (!p) throw DomainError("malformed prefix '" + m_prefix + "'");
                prefix = *p;
            } else {
                prefix = default_prefix(*topo, Family::v4);
            }
            plan.anycast_prefix = prefix;
            if (auto warning = pace_check(plan)) std::cerr << "advisory: " << *warning << "\n";
            MeasurementOptions opts;
            opts.workers = workers;
            auto records = run_measurement(*rib, plan, opts);
            emit(m_out, write_replies_csv(records));
            return 0;
        }

        if (rep_catchment->parsed()) {
            CatchmentReport rep = catchment_summary(read_replies_csv(read_file(rc_file)));
            std::cout << (rc_csv ? render_catchment_csv(rep) : render_catchment_text(rep));
            return 0;
        }
        if (rep_ttl->parsed()) {
            std::cout << render_ttl_csv(ttl_distribution(read_replies_csv(read_file(rt_file))));
            return 0;
        }
        if (rep_rtt->parsed()) {
            RttGroupBy by;
            if (rr_by == "site") by = RttGroupBy::site;
            else if (rr_by == "country") by = RttGroupBy::country;
            else if (rr_by == "site-country") by = RttGroupBy::site_country;
            else throw CLI::ValidationError("report rtt", "--by must be site, country or site-country");
            std::cout << render_rtt_csv(rtt_aggregate(read_replies_csv(read_file(rr_file)), by));
            return 0;
        }
        if (rep_load->parsed()) {
            auto records = read_replies_csv(read_file(rl_file));
            std::map<Asn, std::string> cmap;
            std::vector<HitListEntry> vps;
            std::set<Prefix> seen;
            for (const auto& r : records) {
                cmap[r.asn] = r.site;
                if (!seen.insert(vantage_block(r.target_ip)).second) continue;
                HitListEntry e;
                e.address = r.target_ip;
                e.cc = r.cc;
                e.asn = r.asn;
                vps.push_back(e);
            }
            std::cout << render_load_csv(load_estimate(cmap, vps));
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
