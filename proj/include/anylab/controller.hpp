#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "anylab/routing.hpp"
#include "anylab/topology.hpp"

namespace anylab {

struct LogEntry {
    int64_t timestamp = 0;
    std::string command;  // canonical scenario grammar form
    std::string outcome;  // "ok", "noop", or "error: ..."
};

/// Stateful command layer over the announcement set. Single writer; readers
/// may copy. Every mutating command lands in the append-only log.
class ControlState {
public:
    explicit ControlState(std::shared_ptr<const AsTopology> topology)
        : topology_(std::move(topology)) {}

    const AsTopology& topology() const { return *topology_; }
    std::shared_ptr<const AsTopology> topology_ptr() const { return topology_; }

    const std::map<std::pair<std::string, Prefix>, Announcement>& active() const {
        return announcements_;
    }
    std::vector<Announcement> announcement_list() const;
    const std::vector<LogEntry>& log() const { return log_; }

    /// Stores (or replaces) the site's announcement for the prefix.
    /// Idempotent for identical arguments. Throws DomainError on unknown
    /// site, family mismatch, uncovered prefix or capability violation.
    void announce(const std::string& site_id, const Prefix& prefix, Family family, int prepend,
                  std::vector<Community> communities);

    /// Removes the announcement; withdrawing an absent one is a logged no-op.
    void withdraw(const std::string& site_id, const Prefix& prefix);

    /// Adds `n` prepends at every announcing site except keep_site.
    void reverse_prepend(const Prefix& prefix, const std::string& keep_site, int n);

    /// Human-readable summary: per-site announcements plus per-neighbor
    /// export verdicts from a propagation run (labeled simulated).
    std::string status() const;

    /// Current routes for the active announcement set.
    RibSet ribs() const;

    int64_t clock() const { return clock_; }
    void set_clock(int64_t t) { clock_ = t; }
    void append_log(int64_t t, const std::string& command, const std::string& outcome);

private:
    std::shared_ptr<const AsTopology> topology_;
    std::map<std::pair<std::string, Prefix>, Announcement> announcements_;
    std::vector<LogEntry> log_;
    int64_t clock_ = 0;
};

struct ScenarioCommand {
    int64_t timestamp = 0;
    std::string text;  // command portion after the timestamp
};

/// Parses the scenario grammar:
///   <t> announce <site> <prefix> [prepend=<n>] [community=<spec>[,...]]
///   <t> withdraw <site> <prefix>
///   <t> reverse-prepend <prefix> keep=<site> n=<k>
std::vector<ScenarioCommand> parse_scenario(const std::string& text);

struct ScenarioResult {
    std::vector<RibSet> snapshots;  // one per applied mutation
    std::optional<int> failed_index;  // 1-based index of the first failing command
    std::string error;
};

/// Applies commands in timestamp order (stable for ties). Stops at the first
/// failing command, keeping earlier snapshots and state.
ScenarioResult run_scenario(ControlState& state, const std::vector<ScenarioCommand>& script);

/// Applies one already-parsed scenario command to the state at time t.
void apply_command(ControlState& state, int64_t t, const std::string& command_text);

/// Replays the state's own command log onto a fresh state (log completeness).
ControlState replay_log(std::shared_ptr<const AsTopology> topology,
                        const std::vector<LogEntry>& log);

}  // namespace anylab
