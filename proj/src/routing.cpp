#include "anylab/routing.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace anylab {

Policy Community::required_policy() const {
    switch (kind) {
        case Kind::Prepend: return Policy::Prepend;
        case Kind::NoPeer: return Policy::NoPeer;
        case Kind::NoExport: return Policy::NoExport;
        case Kind::NoClient: return Policy::NoClient;
        case Kind::SelectivePrepend: return Policy::SelectivePrepend;
        case Kind::SelectiveAdvertiseOnly:
        case Kind::SelectiveAdvertiseExcept: return Policy::SelectiveAdvertise;
    }
    return Policy::Prepend;
}

std::string Community::to_string() const {
    switch (kind) {
        case Kind::Prepend: return "Prepend:" + std::to_string(count);
        case Kind::NoPeer: return "noPeer";
        case Kind::NoExport: return "noExport";
        case Kind::NoClient: return "noClient";
        case Kind::SelectivePrepend:
            return "SelectivePrepend:" + std::to_string(target) + ":" + std::to_string(count);
        case Kind::SelectiveAdvertiseOnly: return "SelectiveAdvertiseOnly:" + std::to_string(target);
        case Kind::SelectiveAdvertiseExcept:
            return "SelectiveAdvertiseExcept:" + std::to_string(target);
    }
    return "?";
}

std::optional<Community> parse_community(std::string_view spec) {
    std::vector<std::string> parts;
    size_t i = 0;
    while (i <= spec.size()) {
        size_t j = spec.find(':', i);
        parts.emplace_back(spec.substr(i, (j == std::string_view::npos ? spec.size() : j) - i));
        if (j == std::string_view::npos) break;
        i = j + 1;
    }
    if (parts.empty()) return std::nullopt;
    std::string name = parts[0];
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    auto num = [](const std::string& s, auto& out) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc() && p == s.data() + s.size();
    };
    Community c;
    if (name == "prepend") {
        c.kind = Community::Kind::Prepend;
        if (parts.size() != 2 || !num(parts[1], c.count) || c.count < 1) return std::nullopt;
    } else if (name == "nopeer") {
        c.kind = Community::Kind::NoPeer;
        if (parts.size() != 1) return std::nullopt;
    } else if (name == "noexport") {
        c.kind = Community::Kind::NoExport;
        if (parts.size() != 1) return std::nullopt;
    } else if (name == "noclient") {
        c.kind = Community::Kind::NoClient;
        if (parts.size() != 1) return std::nullopt;
    } else if (name == "selectiveprepend") {
        c.kind = Community::Kind::SelectivePrepend;
        if (parts.size() != 3 || !num(parts[1], c.target) || !num(parts[2], c.count) || c.count < 1)
            return std::nullopt;
    } else if (name == "selectiveadvertiseonly") {
        c.kind = Community::Kind::SelectiveAdvertiseOnly;
        if (parts.size() != 2 || !num(parts[1], c.target)) return std::nullopt;
    } else if (name == "selectiveadvertiseexcept") {
        c.kind = Community::Kind::SelectiveAdvertiseExcept;
        if (parts.size() != 2 || !num(parts[1], c.target)) return std::nullopt;
    } else {
        return std::nullopt;
    }
    return c;
}

void check_announcement(const AsTopology& topology, Announcement& a) {
    const AnycastSite* site = topology.find_site(a.site_id);
    if (!site) throw DomainError("unknown site '" + a.site_id + "'");
    if (!topology.find_node(site->host_asn))
        throw DomainError("site " + a.site_id + " has no host as in the topology");
    if (!topology.covers_anycast(a.prefix))
        throw DomainError("prefix " + format_prefix(a.prefix) +
                          " is outside the declared anycast prefixes");
    if (a.origin_prepend < 0) throw DomainError("negative prepend count");
    for (const auto& c : a.communities) {
        if (!site->has_capability(c.required_policy()))
            throw DomainError("capability violation: site " + a.site_id + " does not support " +
                              policy_name(c.required_policy()));
        if ((c.kind == Community::Kind::Prepend || c.kind == Community::Kind::SelectivePrepend) &&
            c.count < 1)
            throw DomainError("community prepend count must be >= 1");
        if (c.kind == Community::Kind::SelectivePrepend ||
            c.kind == Community::Kind::SelectiveAdvertiseOnly ||
            c.kind == Community::Kind::SelectiveAdvertiseExcept) {
            if (!topology.find_node(c.target))
                throw DomainError("community target as " + std::to_string(c.target) +
                                  " is not in the topology");
        }
    }
    std::sort(a.poisoned_asns.begin(), a.poisoned_asns.end());
    a.poisoned_asns.erase(std::unique(a.poisoned_asns.begin(), a.poisoned_asns.end()),
                          a.poisoned_asns.end());
    for (Asn x : a.poisoned_asns)
        if (x == site->host_asn)
            throw DomainError("site " + a.site_id + " cannot poison its own as");
    std::sort(a.communities.begin(), a.communities.end());
    a.communities.erase(std::unique(a.communities.begin(), a.communities.end()),
                        a.communities.end());
}

const RibEntry* RibSet::find(Asn asn, const Prefix& prefix) const {
    auto it = entries_.find({asn, prefix});
    return it == entries_.end() ? nullptr : &it->second;
}

const RibEntry* RibSet::lookup(Asn asn, const IpAddress& addr) const {
    const RibEntry* best = nullptr;
    for (auto it = entries_.lower_bound({asn, Prefix{}}); it != entries_.end() && it->first.first == asn;
         ++it) {
        const Prefix& p = it->first.second;
        if (!p.contains(addr)) continue;
        if (!best || p.length > best->prefix.length) best = &it->second;
    }
    return best;
}

namespace {

enum RelSide : uint8_t { REL_CUSTOMER = 0, REL_PEER = 1, REL_PROVIDER = 2 };

RelSide invert(RelSide r) {
    if (r == REL_CUSTOMER) return REL_PROVIDER;
    if (r == REL_PROVIDER) return REL_CUSTOMER;
    return REL_PEER;
}

int tier_of(RelSide learned) {
    switch (learned) {
        case REL_CUSTOMER: return 200;  // route learned from a customer
        case REL_PEER: return 100;
        case REL_PROVIDER: return 50;
    }
    return 0;
}

struct Edge {
    uint32_t nbr;
    RelSide rel;  // neighbor's role from this node's perspective
    double lat;
};

struct Index {
    std::vector<Asn> asn_of;
    std::unordered_map<Asn, uint32_t> idx_of;
    std::vector<std::vector<Edge>> adj;

    explicit Index(const AsTopology& topo) {
        asn_of.reserve(topo.nodes.size());
        for (const auto& n : topo.nodes) {
            if (idx_of.count(n.asn)) continue;
            idx_of.emplace(n.asn, uint32_t(asn_of.size()));
            asn_of.push_back(n.asn);
        }
        adj.resize(asn_of.size());
        for (const auto& l : topo.links) {
            auto a = idx_of.find(l.from_asn), b = idx_of.find(l.to_asn);
            if (a == idx_of.end() || b == idx_of.end() || a->second == b->second) continue;
            if (l.relationship == Relationship::customer_of) {
                adj[a->second].push_back({b->second, REL_PROVIDER, l.latency_ms});
                adj[b->second].push_back({a->second, REL_CUSTOMER, l.latency_ms});
            } else {
                adj[a->second].push_back({b->second, REL_PEER, l.latency_ms});
                adj[b->second].push_back({a->second, REL_PEER, l.latency_ms});
            }
        }
    }
};

struct NodeMask {
    std::vector<uint64_t> w;
    explicit NodeMask(size_t words) : w(words, 0) {}
    void set(uint32_t i) { w[i >> 6] |= 1ull << (i & 63); }
    bool test(uint32_t i) const { return (w[i >> 6] >> (i & 63)) & 1; }
    bool subset_of(const NodeMask& o) const {
        for (size_t k = 0; k < w.size(); ++k)
            if (w[k] & ~o.w[k]) return false;
        return true;
    }
    bool operator==(const NodeMask&) const = default;
};

struct Label {
    std::vector<Asn> path;  // as advertised to the holder; front is next hop
    NodeMask visited;       // topology members appearing in path
};

// A dominates B when any permitted extension of B has an extension of A that
// ranks at least as well: shorter-or-equal, visits a subset, lex-no-worse on
// full ties.
bool dominates(const Label& a, const Label& b) {
    if (a.path.size() > b.path.size()) return false;
    if (!a.visited.subset_of(b.visited)) return false;
    if (a.path.size() < b.path.size()) return true;
    return !std::lexicographical_compare(b.path.begin(), b.path.end(), a.path.begin(), a.path.end());
}

struct Overlay {
    bool no_export = false, no_peer = false, no_client = false;
    std::vector<Asn> adv_only, adv_except;
    std::vector<std::pair<Asn, int>> sel_prepend;
    int origin_extra = 0;  // plain Prepend communities

    static Overlay from(const Announcement& a) {
        Overlay o;
        for (const auto& c : a.communities) {
            using K = Community::Kind;
            switch (c.kind) {
                case K::Prepend: o.origin_extra += c.count; break;
                case K::NoPeer: o.no_peer = true; break;
                case K::NoExport: o.no_export = true; break;
                case K::NoClient: o.no_client = true; break;
                case K::SelectivePrepend: o.sel_prepend.emplace_back(c.target, c.count); break;
                case K::SelectiveAdvertiseOnly: o.adv_only.push_back(c.target); break;
                case K::SelectiveAdvertiseExcept: o.adv_except.push_back(c.target); break;
            }
        }
        return o;
    }

    // Export filter applied at ASes that heard the announcement straight from
    // the origin. A named selective target that is itself origin-adjacent
    // forwards normally (the filter binds the conduits, not the target).
    bool permits(Asn self_asn, Asn nbr_asn, RelSide nbr_rel) const {
        if (no_export) return false;
        if (no_peer && nbr_rel == REL_PEER) return false;
        if (no_client && nbr_rel == REL_CUSTOMER) return false;
        bool self_is_target =
            std::find(adv_only.begin(), adv_only.end(), self_asn) != adv_only.end() ||
            std::find(adv_except.begin(), adv_except.end(), self_asn) != adv_except.end();
        if (self_is_target) return true;
        if (!adv_only.empty() &&
            std::find(adv_only.begin(), adv_only.end(), nbr_asn) == adv_only.end())
            return false;
        if (std::find(adv_except.begin(), adv_except.end(), nbr_asn) != adv_except.end())
            return false;
        return true;
    }
    int prepend_toward(Asn nbr_asn) const {
        int n = 0;
        for (const auto& [t, k] : sel_prepend)
            if (t == nbr_asn) n += k;
        return n;
    }
};

struct OriginSpec {
    uint32_t origin_idx;
    std::vector<Asn> block;  // path as announced by the origin
    Overlay overlay;
};

// Pareto label sets per (node, origin, class, direct-from-origin).
class Engine {
public:
    Engine(const Index& index, uint64_t order_seed, uint64_t work_cap)
        : index_(index), work_cap_(work_cap), rng_(order_seed), shuffle_(order_seed != 0) {}

    // cells_[node][origin][cls][direct]
    using Cell = std::vector<Label>;

    void run(const std::vector<OriginSpec>& origins) {
        origins_ = &origins;
        cells_.assign(index_.asn_of.size() * origins.size() * 6, {});
        std::deque<std::tuple<uint32_t, uint32_t, uint8_t, uint8_t, Label>> queue;

        for (uint32_t oi = 0; oi < origins.size(); ++oi) {
            const OriginSpec& spec = origins[oi];
            NodeMask block_mask(mask_words());
            for (Asn asn : spec.block) {
                auto it = index_.idx_of.find(asn);
                if (it != index_.idx_of.end()) block_mask.set(it->second);
            }
            for (const Edge& e : edges_of(spec.origin_idx)) {
                if (block_mask.test(e.nbr)) continue;  // poisoned neighbor
                Label l{spec.block, block_mask};
                uint8_t cls = invert(e.rel);  // origin's role from the neighbor's side
                if (insert(e.nbr, oi, cls, 1, l)) queue.emplace_back(e.nbr, oi, cls, 1, std::move(l));
            }
        }

        while (!queue.empty()) {
            auto [v, oi, cls, direct, label] = std::move(queue.front());
            queue.pop_front();
            if (!present(v, oi, cls, direct, label)) continue;
            const OriginSpec& spec = (*origins_)[oi];
            for (const Edge& e : edges_of(v)) {
                // Valley-free export: customer-learned goes everywhere, the
                // rest only down to customers.
                if (cls != REL_CUSTOMER && e.rel != REL_CUSTOMER) continue;
                if (direct &&
                    !spec.overlay.permits(index_.asn_of[v], index_.asn_of[e.nbr], e.rel))
                    continue;
                if (label.visited.test(e.nbr)) continue;
                int inflate = direct ? spec.overlay.prepend_toward(index_.asn_of[e.nbr]) : 0;
                Label next{{}, label.visited};
                next.visited.set(v);
                next.path.reserve(label.path.size() + 1 + size_t(inflate));
                next.path.insert(next.path.end(), size_t(1 + inflate), index_.asn_of[v]);
                next.path.insert(next.path.end(), label.path.begin(), label.path.end());
                uint8_t ncls = invert(e.rel);
                if (insert(e.nbr, oi, ncls, 0, next))
                    queue.emplace_back(e.nbr, oi, ncls, 0, std::move(next));
            }
        }
    }

    const Cell& cell(uint32_t node, uint32_t origin, uint8_t cls, uint8_t direct) const {
        return cells_[index_of(node, origin, cls, direct)];
    }

    uint64_t work() const { return work_; }
    bool capped() const { return capped_; }

private:
    size_t mask_words() const { return (index_.asn_of.size() + 63) / 64; }

    size_t index_of(uint32_t node, uint32_t origin, uint8_t cls, uint8_t direct) const {
        return (size_t(node) * origins_->size() + origin) * 6 + size_t(cls) * 2 + direct;
    }

    const std::vector<Edge>& edges_of(uint32_t v) {
        if (!shuffle_) return index_.adj[v];
        if (shuffled_.empty()) {
            shuffled_.resize(index_.adj.size());
            for (size_t i = 0; i < index_.adj.size(); ++i) {
                shuffled_[i] = index_.adj[i];
                std::shuffle(shuffled_[i].begin(), shuffled_[i].end(), rng_);
            }
        }
        return shuffled_[v];
    }

    bool present(uint32_t v, uint32_t oi, uint8_t cls, uint8_t direct, const Label& l) const {
        for (const Label& e : cells_[index_of(v, oi, cls, direct)])
            if (e.path == l.path) return true;
        return false;
    }

    bool insert(uint32_t v, uint32_t oi, uint8_t cls, uint8_t direct, const Label& l) {
        if (++work_ > work_cap_) {
            capped_ = true;
            return false;
        }
        Cell& cell = cells_[index_of(v, oi, cls, direct)];
        for (const Label& e : cell)
            if (dominates(e, l)) return false;
        std::erase_if(cell, [&](const Label& e) { return dominates(l, e); });
        cell.push_back(l);
        return true;
    }

    const Index& index_;
    const std::vector<OriginSpec>* origins_ = nullptr;
    std::vector<Cell> cells_;
    uint64_t work_ = 0, work_cap_;
    bool capped_ = false;
    std::mt19937_64 rng_;
    bool shuffle_;
    std::vector<std::vector<Edge>> shuffled_;
};

std::vector<Asn> origin_block(Asn origin, const Announcement& a, int community_prepend) {
    int repeats = 1 + a.origin_prepend + community_prepend;
    std::vector<Asn> block;
    if (a.poisoned_asns.empty()) {
        block.assign(size_t(repeats), origin);
    } else {
        // Poisoned ASNs ride between prepends of the origin, so only the
        // poisoned AS itself rejects the route.
        block.push_back(origin);
        block.insert(block.end(), a.poisoned_asns.begin(), a.poisoned_asns.end());
        block.insert(block.end(), size_t(repeats), origin);
    }
    return block;
}

uint64_t default_work_cap(size_t nodes) {
    return std::max<uint64_t>(200000, uint64_t(nodes) * nodes * 64);
}

}  // namespace

RibSet propagate(std::shared_ptr<const AsTopology> topology, std::vector<Announcement> announcements,
                 const PropagateOptions& options) {
    const AsTopology& topo = *topology;
    std::set<std::pair<std::string, Prefix>> keys;
    for (auto& a : announcements) {
        check_announcement(topo, a);
        if (!keys.insert({a.site_id, a.prefix}).second)
            throw DomainError("duplicate announcement for site " + a.site_id + " prefix " +
                              format_prefix(a.prefix));
    }

    Index index(topo);
    std::vector<OriginSpec> origins;
    origins.reserve(announcements.size());
    for (const auto& a : announcements) {
        const AnycastSite* site = topo.find_site(a.site_id);
        Overlay overlay = Overlay::from(a);
        OriginSpec spec{index.idx_of.at(site->host_asn),
                        origin_block(site->host_asn, a, overlay.origin_extra), overlay};
        origins.push_back(std::move(spec));
    }

    uint64_t cap = options.work_cap_override ? options.work_cap_override
                                             : default_work_cap(index.asn_of.size());
    Engine engine(index, options.order_seed, cap);
    engine.run(origins);
    if (engine.capped()) {
        std::string prefixes;
        for (const auto& a : announcements) {
            if (!prefixes.empty()) prefixes += ", ";
            prefixes += format_prefix(a.prefix);
        }
        throw OscillationError("propagation failed to converge for prefix " + prefixes);
    }

    std::map<std::pair<Asn, Prefix>, RibEntry> entries;
    for (uint32_t v = 0; v < index.asn_of.size(); ++v) {
        Asn holder = index.asn_of[v];
        // Per prefix: self-origination wins, then tier, length, next hop, path.
        std::map<Prefix, RibEntry> best_of;
        auto consider = [&](const Prefix& pfx, int lp, const std::vector<Asn>& path, Asn next_hop,
                            const std::string& site) {
            auto it = best_of.find(pfx);
            if (it != best_of.end()) {
                const RibEntry& cur = it->second;
                if (cur.local_pref != lp) { if (cur.local_pref > lp) return; }
                else if (cur.as_path.size() != path.size()) { if (cur.as_path.size() < path.size()) return; }
                else if (cur.next_hop_asn != next_hop) { if (cur.next_hop_asn < next_hop) return; }
                else if (cur.as_path != path) { if (cur.as_path < path) return; }
                else if (cur.origin_site_id <= site) return;
            }
            best_of[pfx] = RibEntry{holder, pfx, path, next_hop, site, lp};
        };
        for (uint32_t oi = 0; oi < origins.size(); ++oi) {
            const Announcement& a = announcements[oi];
            if (origins[oi].origin_idx == v) {
                consider(a.prefix, 300, {}, holder, a.site_id);
                continue;
            }
            for (uint8_t cls = 0; cls < 3; ++cls)
                for (uint8_t direct = 0; direct < 2; ++direct)
                    for (const Label& l : engine.cell(v, oi, cls, direct))
                        consider(a.prefix, tier_of(RelSide(cls)), l.path, l.path.front(), a.site_id);
        }
        for (auto& [pfx, entry] : best_of) entries.emplace(std::make_pair(holder, pfx), std::move(entry));
    }
    return RibSet(std::move(topology), std::move(announcements), std::move(entries));
}

RibSet poisoned_reachability(std::shared_ptr<const AsTopology> topology, Announcement announcement) {
    return propagate(std::move(topology), {std::move(announcement)});
}

std::map<Asn, std::string> catchment(const RibSet& rib, const Prefix& anycast_prefix) {
    std::map<Asn, std::string> out;
    IpAddress addr = anycast_prefix.first_host();
    for (const auto& n : rib.topology().nodes) {
        const RibEntry* e = rib.lookup(n.asn, addr);
        if (e) out.emplace(n.asn, e->origin_site_id);
    }
    return out;
}

std::vector<Asn> forward_path(const RibSet& rib, Asn from_asn, const Prefix& prefix) {
    // The walk stays on entries for this exact prefix; overlapping
    // more-specifics are someone else's experiment.
    std::vector<Asn> hops;
    std::set<Asn> seen{from_asn};
    Asn cur = from_asn;
    const RibEntry* e = rib.find(cur, prefix);
    if (!e) throw DomainError("as " + std::to_string(from_asn) + " holds no route to " +
                              format_prefix(prefix));
    while (!e->as_path.empty()) {
        Asn next = e->next_hop_asn;
        if (!seen.insert(next).second)
            throw DomainError("forwarding loop at as " + std::to_string(next));
        hops.push_back(next);
        cur = next;
        e = rib.find(cur, prefix);
        if (!e) throw DomainError("inconsistent rib: as " + std::to_string(cur) + " lost the route");
    }
    return hops;
}

std::unordered_map<Asn, std::vector<Asn>> unicast_paths(const AsTopology& topology, Asn target_asn) {
    Index index(topology);
    auto it = index.idx_of.find(target_asn);
    if (it == index.idx_of.end())
        throw DomainError("unicast target as " + std::to_string(target_asn) + " not in topology");

    std::vector<OriginSpec> origins;
    origins.push_back(OriginSpec{it->second, {target_asn}, Overlay{}});
    Engine engine(index, 0, default_work_cap(index.asn_of.size()));
    engine.run(origins);
    if (engine.capped()) throw OscillationError("unicast propagation failed to converge");

    std::unordered_map<Asn, std::vector<Asn>> out;
    out.emplace(target_asn, std::vector<Asn>{});
    for (uint32_t v = 0; v < index.asn_of.size(); ++v) {
        if (v == it->second) continue;
        const Label* best = nullptr;
        int best_lp = -1;
        for (uint8_t cls = 0; cls < 3; ++cls) {
            int lp = tier_of(RelSide(cls));
            for (uint8_t direct = 0; direct < 2; ++direct) {
                for (const Label& l : engine.cell(v, 0, cls, direct)) {
                    if (!best) { best = &l; best_lp = lp; continue; }
                    if (best_lp != lp) { if (best_lp > lp) continue; }
                    else if (best->path.size() != l.path.size()) { if (best->path.size() < l.path.size()) continue; }
                    else if (best->path.front() != l.path.front()) { if (best->path.front() < l.path.front()) continue; }
                    else if (!std::lexicographical_compare(l.path.begin(), l.path.end(),
                                                           best->path.begin(), best->path.end()))
                        continue;
                    best = &l;
                    best_lp = lp;
                }
            }
        }
        if (best) out.emplace(index.asn_of[v], best->path);
    }
    return out;
}

double path_latency(const AsTopology& topology, Asn from_asn, const std::vector<Asn>& hops) {
    std::map<std::pair<Asn, Asn>, double> lat;
    for (const auto& l : topology.links) {
        lat[{l.from_asn, l.to_asn}] = l.latency_ms;
        lat[{l.to_asn, l.from_asn}] = l.latency_ms;
    }
    double total = 0.0;
    Asn cur = from_asn;
    for (Asn next : hops) {
        auto it = lat.find({cur, next});
        if (it == lat.end())
            throw DomainError("no link between as " + std::to_string(cur) + " and as " +
                              std::to_string(next));
        total += it->second;
        cur = next;
    }
    return total;
}

std::string rib_to_csv(const RibSet& rib) {
    std::ostringstream out;
    out << "asn,prefix,as_path,next_hop,origin_site\n";
    for (const auto& [key, e] : rib.entries()) {
        out << key.first << "," << format_prefix(key.second) << ",";
        for (size_t i = 0; i < e.as_path.size(); ++i) {
            if (i) out << " ";
            out << e.as_path[i];
        }
        out << "," << e.next_hop_asn << "," << e.origin_site_id << "\n";
    }
    return out.str();
}

}  // namespace anylab
