#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "anylab/analysis.hpp"
#include "anylab/controller.hpp"
#include "anylab/probe.hpp"
#include "anylab/replies_csv.hpp"
#include "anylab/routing.hpp"
#include "anylab/topology.hpp"

namespace py = pybind11;
using namespace anylab;

namespace {

Prefix prefix_from_str(const std::string& text) {
    auto p = parse_prefix(text);
    if (!p) throw DomainError("malformed prefix '" + text + "'");
    return *p;
}

std::vector<Community> communities_from_strs(const std::vector<std::string>& specs) {
    std::vector<Community> out;
    for (const auto& s : specs) {
        auto c = parse_community(s);
        if (!c) throw DomainError("bad community spec '" + s + "'");
        out.push_back(*c);
    }
    return out;
}

Announcement make_announcement(const std::string& site, const std::string& prefix, int prepend,
                               const std::vector<std::string>& communities,
                               const std::vector<Asn>& poisoned) {
    Announcement a;
    a.site_id = site;
    a.prefix = prefix_from_str(prefix);
    a.origin_prepend = prepend;
    a.communities = communities_from_strs(communities);
    a.poisoned_asns = poisoned;
    return a;
}

}  // namespace

PYBIND11_MODULE(_anylab, m) {
    m.doc() = "anycast routing, traffic engineering and catchment laboratory";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<OscillationError>(m, "OscillationError", PyExc_RuntimeError);

    py::class_<AsTopology, std::shared_ptr<AsTopology>>(m, "Topology")
        .def_static(
            "fixture",
            [](int stubs, uint64_t seed) {
                return std::make_shared<AsTopology>(reference_fixture(stubs, seed));
            },
            py::arg("stubs") = 200, py::arg("seed") = 1,
            "Built-in 12-site reference topology with a seeded stub cloud.")
        .def_static(
            "load",
            [](const std::string& text) {
                return std::make_shared<AsTopology>(load_topology(text));
            },
            py::arg("text"), "Parse and validate the line-oriented topology format.")
        .def("serialize", [](const AsTopology& t) { return serialize_topology(t); })
        .def("validate", [](const AsTopology& t) { return validate(t); })
        .def_property_readonly("notes", [](const AsTopology& t) { return t.notes; })
        .def_property_readonly("node_count", [](const AsTopology& t) { return t.nodes.size(); })
        .def_property_readonly("link_count", [](const AsTopology& t) { return t.links.size(); })
        .def_property_readonly("sites",
                               [](const AsTopology& t) {
                                   std::vector<std::pair<std::string, Asn>> out;
                                   for (const auto& s : t.sites)
                                       out.emplace_back(s.site_id, s.host_asn);
                                   return out;
                               })
        .def("site_capabilities", [](const AsTopology& t, const std::string& site_id) {
            const AnycastSite* s = t.find_site(site_id);
            if (!s) throw DomainError("unknown site '" + site_id + "'");
            std::vector<std::string> out;
            for (Policy p : s->te_capabilities) out.push_back(policy_name(p));
            return out;
        });

    py::class_<Announcement>(m, "Announcement")
        .def(py::init(&make_announcement), py::arg("site"), py::arg("prefix"),
             py::arg("prepend") = 0, py::arg("communities") = std::vector<std::string>{},
             py::arg("poisoned") = std::vector<Asn>{})
        .def_readonly("site", &Announcement::site_id)
        .def_property_readonly("prefix",
                               [](const Announcement& a) { return format_prefix(a.prefix); })
        .def_readonly("prepend", &Announcement::origin_prepend);

    py::class_<RibSet>(m, "Rib")
        .def("catchment",
             [](const RibSet& rib, const std::string& prefix) {
                 return catchment(rib, prefix_from_str(prefix));
             },
             py::arg("prefix"))
        .def("forward_path",
             [](const RibSet& rib, Asn from_asn, const std::string& prefix) {
                 return forward_path(rib, from_asn, prefix_from_str(prefix));
             },
             py::arg("from_asn"), py::arg("prefix"))
        .def("to_csv", [](const RibSet& rib) { return rib_to_csv(rib); })
        .def("__len__", [](const RibSet& rib) { return rib.entries().size(); });

    m.def(
        "propagate",
        [](std::shared_ptr<AsTopology> topo, const std::vector<Announcement>& anns) {
            return propagate(std::move(topo), anns);
        },
        py::arg("topology"), py::arg("announcements"),
        "Valley-free route propagation; returns the per-AS best-route set.");

    py::class_<ControlState>(m, "Controller")
        .def(py::init([](std::shared_ptr<AsTopology> topo) {
                 return ControlState(std::move(topo));
             }),
             py::arg("topology"))
        .def(
            "announce",
            [](ControlState& s, const std::string& site, const std::string& prefix, int prepend,
               const std::vector<std::string>& communities) {
                Prefix p = prefix_from_str(prefix);
                s.announce(site, p, p.family(), prepend, communities_from_strs(communities));
            },
            py::arg("site"), py::arg("prefix"), py::arg("prepend") = 0,
            py::arg("communities") = std::vector<std::string>{})
        .def("withdraw",
             [](ControlState& s, const std::string& site, const std::string& prefix) {
                 s.withdraw(site, prefix_from_str(prefix));
             },
             py::arg("site"), py::arg("prefix"))
        .def("reverse_prepend",
             [](ControlState& s, const std::string& prefix, const std::string& keep, int n) {
                 s.reverse_prepend(prefix_from_str(prefix), keep, n);
             },
             py::arg("prefix"), py::arg("keep"), py::arg("n"))
        .def("status", &ControlState::status)
        .def("ribs", &ControlState::ribs)
        .def("run_scenario",
             [](ControlState& s, const std::string& script) {
                 ScenarioResult r = run_scenario(s, parse_scenario(script));
                 py::dict out;
                 out["snapshots"] = r.snapshots.size();
                 out["failed_index"] =
                     r.failed_index ? py::object(py::int_(*r.failed_index)) : py::none();
                 out["error"] = r.error;
                 return out;
             },
             py::arg("script"))
        .def_property_readonly("announcements", &ControlState::announcement_list)
        .def_property_readonly("log", [](const ControlState& s) {
            std::vector<std::tuple<int64_t, std::string, std::string>> out;
            for (const auto& e : s.log()) out.emplace_back(e.timestamp, e.command, e.outcome);
            return out;
        });

    py::class_<HitListEntry>(m, "HitListEntry")
        .def_property_readonly("address",
                               [](const HitListEntry& e) { return format_address(e.address); })
        .def_readonly("cc", &HitListEntry::cc)
        .def_readonly("asn", &HitListEntry::asn)
        .def_readonly("routable", &HitListEntry::routable);

    m.def(
        "load_hitlist",
        [](const std::string& text, const AsTopology& topo) { return load_hitlist(text, topo); },
        py::arg("text"), py::arg("topology"));
    m.def(
        "synth_hitlist",
        [](const AsTopology& topo, int count, uint64_t seed) {
            return synth_hitlist(topo, count, seed);
        },
        py::arg("topology"), py::arg("count"), py::arg("seed") = 1);
    m.def(
        "estimate_duration",
        [](size_t hitlist_size, int pingers, double rate) {
            MeasurementPlan plan;
            plan.hitlist.resize(hitlist_size);
            for (int i = 0; i < pingers; ++i) plan.pinger_sites.push_back("p" + std::to_string(i));
            plan.rate_pps = rate;
            return estimate_duration_seconds(plan);
        },
        py::arg("hitlist_size"), py::arg("pingers") = 1, py::arg("rate") = 3612.0,
        "ceil(hitlist / (rate * pingers)) in seconds.");
    m.def(
        "pace_check",
        [](int pingers, double rate, double threshold) -> py::object {
            MeasurementPlan plan;
            for (int i = 0; i < pingers; ++i) plan.pinger_sites.push_back("p" + std::to_string(i));
            plan.rate_pps = rate;
            auto w = pace_check(plan, threshold);
            return w ? py::object(py::str(*w)) : py::none();
        },
        py::arg("pingers") = 1, py::arg("rate") = 3612.0, py::arg("threshold") = 10000.0);

    py::class_<ReplyRecord>(m, "ReplyRecord")
        .def_readonly("site", &ReplyRecord::site)
        .def_readonly("time_diff_ms", &ReplyRecord::time_diff_ms)
        .def_property_readonly("target_ip",
                               [](const ReplyRecord& r) { return format_address(r.target_ip); })
        .def_property_readonly("anycast_ip",
                               [](const ReplyRecord& r) { return format_address(r.anycast_ip); })
        .def_readonly("ttl", &ReplyRecord::ttl)
        .def_readonly("cc", &ReplyRecord::cc)
        .def_readonly("asn", &ReplyRecord::asn)
        .def("__repr__", [](const ReplyRecord& r) { return "<ReplyRecord " + format_reply_row(r) + ">"; });

    m.def(
        "run_measurement",
        [](const RibSet& rib, const std::vector<HitListEntry>& hitlist,
           const std::vector<std::string>& pingers, const std::string& prefix, double rate,
           int workers, double loss_probability, uint64_t loss_seed) {
            MeasurementPlan plan;
            plan.hitlist = hitlist;
            plan.pinger_sites = pingers;
            plan.rate_pps = rate;
            plan.anycast_prefix = prefix_from_str(prefix);
            MeasurementOptions opts;
            opts.workers = workers;
            opts.loss_probability = loss_probability;
            opts.loss_seed = loss_seed;
            return run_measurement(rib, plan, opts);
        },
        py::arg("rib"), py::arg("hitlist"), py::arg("pingers"), py::arg("prefix"),
        py::arg("rate") = 3612.0, py::arg("workers") = 1, py::arg("loss_probability") = 0.0,
        py::arg("loss_seed") = 1,
        "Simulate one probing round and collect the per-vantage-point records.");

    m.def("write_replies_csv",
          [](const std::vector<ReplyRecord>& records) { return write_replies_csv(records); });
    m.def("read_replies_csv", [](const std::string& text) { return read_replies_csv(text); });

    m.def("catchment_report",
          [](const std::vector<ReplyRecord>& records) {
              return render_catchment_text(catchment_summary(records));
          },
          "Per-site reply counts and truncated percents, report layout.");
    m.def("catchment_report_from_counts",
          [](const std::map<std::string, uint64_t>& counts) {
              return render_catchment_text(catchment_report_from_counts(counts));
          });
    m.def("catchment_csv", [](const std::vector<ReplyRecord>& records) {
        return render_catchment_csv(catchment_summary(records));
    });
    m.def("ttl_distribution",
          [](const std::vector<ReplyRecord>& records) { return ttl_distribution(records); });
    m.def(
        "rtt_aggregate",
        [](const std::vector<ReplyRecord>& records, const std::string& by) {
            RttGroupBy group_by;
            if (by == "site") group_by = RttGroupBy::site;
            else if (by == "country") group_by = RttGroupBy::country;
            else if (by == "site-country") group_by = RttGroupBy::site_country;
            else throw DomainError("group_by must be site, country or site-country");
            std::vector<std::tuple<std::string, uint64_t, double, double, double, double, double>> out;
            for (const auto& r : rtt_aggregate(records, group_by))
                out.emplace_back(r.group, r.count, r.min, r.median, r.mean, r.p95, r.max);
            return out;
        },
        py::arg("records"), py::arg("by") = "site");
    m.def(
        "load_estimate",
        [](const std::map<Asn, std::string>& catchment_map,
           const std::vector<HitListEntry>& hitlist) {
            return load_estimate(catchment_map, hitlist).slash24_per_site;
        },
        py::arg("catchment"), py::arg("hitlist"),
        "/24 networks per site under the uniform-traffic assumption.");
}
