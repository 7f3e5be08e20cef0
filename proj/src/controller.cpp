#include "anylab/controller.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace anylab {

namespace {

std::string canonical_announce(const std::string& site, const Prefix& prefix, int prepend,
                               const std::vector<Community>& communities) {
    std::string cmd = "announce " + site + " " + format_prefix(prefix);
    if (prepend > 0) cmd += " prepend=" + std::to_string(prepend);
    if (!communities.empty()) {
        cmd += " community=";
        for (size_t i = 0; i < communities.size(); ++i) {
            if (i) cmd += ",";
            cmd += communities[i].to_string();
        }
    }
    return cmd;
}

}  // namespace

std::vector<Announcement> ControlState::announcement_list() const {
    std::vector<Announcement> out;
    out.reserve(announcements_.size());
    for (const auto& [key, a] : announcements_) out.push_back(a);
    return out;
}

void ControlState::append_log(int64_t t, const std::string& command, const std::string& outcome) {
    log_.push_back(LogEntry{t, command, outcome});
}

void ControlState::announce(const std::string& site_id, const Prefix& prefix, Family family,
                            int prepend, std::vector<Community> communities) {
    int64_t t = ++clock_;
    Announcement a;
    a.site_id = site_id;
    a.prefix = prefix;
    a.origin_prepend = prepend;
    a.communities = std::move(communities);
    std::string cmd = canonical_announce(site_id, prefix, prepend, a.communities);
    try {
        if (prefix.family() != family) throw DomainError("prefix family does not match the requested family");
        if (prepend < 0) throw DomainError("negative prepend count");
        check_announcement(*topology_, a);
    } catch (const std::exception& e) {
        append_log(t, cmd, std::string("error: ") + e.what());
        throw;
    }
    announcements_[{site_id, prefix}] = a;
    append_log(t, cmd, "ok");
}

void ControlState::withdraw(const std::string& site_id, const Prefix& prefix) {
    int64_t t = ++clock_;
    std::string cmd = "withdraw " + site_id + " " + format_prefix(prefix);
    if (!topology_->find_site(site_id)) {
        append_log(t, cmd, "error: unknown site '" + site_id + "'");
        throw DomainError("unknown site '" + site_id + "'");
    }
    auto it = announcements_.find({site_id, prefix});
    if (it == announcements_.end()) {
        append_log(t, cmd, "noop");
        return;
    }
    announcements_.erase(it);
    append_log(t, cmd, "ok");
}

void ControlState::reverse_prepend(const Prefix& prefix, const std::string& keep_site, int n) {
    int64_t t = ++clock_;
    std::string cmd = "reverse-prepend " + format_prefix(prefix) + " keep=" + keep_site +
                      " n=" + std::to_string(n);
    try {
        if (n < 1) throw DomainError("reverse-prepend requires n >= 1");
        std::vector<Announcement*> announcing;
        bool keep_announces = false;
        for (auto& [key, a] : announcements_) {
            if (key.second != prefix) continue;
            if (key.first == keep_site) keep_announces = true;
            else announcing.push_back(&a);
        }
        if (!keep_announces)
            throw DomainError("site " + keep_site + " is not announcing " + format_prefix(prefix));
        if (announcing.empty())
            throw DomainError("reverse-prepend needs at least one other announcing site for " +
                              format_prefix(prefix));
        for (Announcement* a : announcing) a->origin_prepend += n;
    } catch (const std::exception& e) {
        append_log(t, cmd, std::string("error: ") + e.what());
        throw;
    }
    append_log(t, cmd, "ok");
}

RibSet ControlState::ribs() const {
    return propagate(topology_, announcement_list());
}

std::string ControlState::status() const {
    std::ostringstream out;
    out << "anycast control status\n";
    if (announcements_.empty()) {
        out << "no active announcements\n";
        return out.str();
    }
    RibSet rib = ribs();
    // Group announcements per site, keeping site declaration order.
    for (const auto& site : topology_->sites) {
        std::vector<const Announcement*> mine;
        for (const auto& [key, a] : announcements_)
            if (key.first == site.site_id) mine.push_back(&a);
        if (mine.empty()) continue;
        out << "site " << site.site_id << " (as " << site.host_asn << ")\n";
        for (const Announcement* a : mine) {
            out << "  announce " << format_prefix(a->prefix) << " prepend=" << a->origin_prepend
                << " communities=";
            for (size_t i = 0; i < a->communities.size(); ++i) {
                if (i) out << ",";
                out << a->communities[i].to_string();
            }
            out << "\n";
            // Export verdict per neighbor of the host AS: did the neighbor
            // import this site's announcement directly?
            for (const auto& l : topology_->links) {
                Asn nbr;
                if (l.from_asn == site.host_asn) nbr = l.to_asn;
                else if (l.to_asn == site.host_asn) nbr = l.from_asn;
                else continue;
                const RibEntry* e = rib.find(nbr, a->prefix);
                bool exported = e && e->next_hop_asn == site.host_asn &&
                                e->origin_site_id == site.site_id;
                bool held = e != nullptr;
                out << "    -> as " << nbr << ": "
                    << (exported ? "exported" : held ? "alternate route" : "filtered")
                    << " [simulated]\n";
            }
        }
    }
    return out.str();
}

std::vector<ScenarioCommand> parse_scenario(const std::string& text) {
    std::vector<ScenarioCommand> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        int64_t t;
        if (!(ls >> t)) {
            std::string rest;
            if (ls.clear(), ls >> rest) throw ParseError(lineno, "expected a logical timestamp");
            continue;  // blank line
        }
        std::string rest;
        std::getline(ls, rest);
        size_t start = rest.find_first_not_of(" \t");
        if (start == std::string::npos) throw ParseError(lineno, "missing command");
        size_t end = rest.find_last_not_of(" \t");
        out.push_back(ScenarioCommand{t, rest.substr(start, end - start + 1)});
    }
    return out;
}

void apply_command(ControlState& state, int64_t t, const std::string& command_text) {
    std::istringstream in(command_text);
    std::string verb;
    in >> verb;
    state.set_clock(t - 1);  // the command itself advances the clock to t
    if (verb == "announce") {
        std::string site, prefix_text;
        if (!(in >> site >> prefix_text)) throw DomainError("announce needs <site> <prefix>");
        auto prefix = parse_prefix(prefix_text);
        if (!prefix) throw DomainError("malformed prefix '" + prefix_text + "'");
        int prepend = 0;
        std::vector<Community> communities;
        std::string tok;
        while (in >> tok) {
            if (tok.rfind("prepend=", 0) == 0) {
                std::string v = tok.substr(8);
                auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), prepend);
                if (ec != std::errc() || p != v.data() + v.size() || prepend < 0)
                    throw DomainError("bad prepend count '" + v + "'");
            } else if (tok.rfind("community=", 0) == 0) {
                std::istringstream cs(tok.substr(10));
                std::string spec;
                while (std::getline(cs, spec, ',')) {
                    auto c = parse_community(spec);
                    if (!c) throw DomainError("bad community spec '" + spec + "'");
                    communities.push_back(*c);
                }
            } else {
                throw DomainError("unknown announce attribute '" + tok + "'");
            }
        }
        state.announce(site, *prefix, prefix->family(), prepend, std::move(communities));
    } else if (verb == "withdraw") {
        std::string site, prefix_text;
        if (!(in >> site >> prefix_text)) throw DomainError("withdraw needs <site> <prefix>");
        auto prefix = parse_prefix(prefix_text);
        if (!prefix) throw DomainError("malformed prefix '" + prefix_text + "'");
        state.withdraw(site, *prefix);
    } else if (verb == "reverse-prepend") {
        std::string prefix_text, keep, n_text;
        if (!(in >> prefix_text)) throw DomainError("reverse-prepend needs <prefix>");
        auto prefix = parse_prefix(prefix_text);
        if (!prefix) throw DomainError("malformed prefix '" + prefix_text + "'");
        std::string keep_site;
        int n = 0;
        std::string tok;
        while (in >> tok) {
            if (tok.rfind("keep=", 0) == 0) keep_site = tok.substr(5);
            else if (tok.rfind("n=", 0) == 0) {
                std::string v = tok.substr(2);
                auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
                if (ec != std::errc() || p != v.data() + v.size())
                    throw DomainError("bad n '" + v + "'");
            } else throw DomainError("unknown reverse-prepend attribute '" + tok + "'");
        }
        if (keep_site.empty()) throw DomainError("reverse-prepend needs keep=<site>");
        state.reverse_prepend(*prefix, keep_site, n);
    } else {
        throw DomainError("unknown command '" + verb + "'");
    }
}

ScenarioResult run_scenario(ControlState& state, const std::vector<ScenarioCommand>& script) {
    std::vector<ScenarioCommand> ordered = script;
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const ScenarioCommand& a, const ScenarioCommand& b) {
                         return a.timestamp < b.timestamp;
                     });
    ScenarioResult result;
    for (size_t i = 0; i < ordered.size(); ++i) {
        try {
            apply_command(state, ordered[i].timestamp, ordered[i].text);
        } catch (const std::exception& e) {
            result.failed_index = int(i) + 1;
            result.error = e.what();
            return result;
        }
        result.snapshots.push_back(state.ribs());
    }
    return result;
}

ControlState replay_log(std::shared_ptr<const AsTopology> topology,
                        const std::vector<LogEntry>& log) {
    ControlState state(std::move(topology));
    for (const auto& entry : log) {
        try {
            apply_command(state, entry.timestamp, entry.command);
        } catch (const std::exception&) {
            // The original run recorded the error; replay keeps going.
        }
    }
    return state;
}

}  // namespace anylab
