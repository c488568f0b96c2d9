// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// Loop deduplication: the trace of a loop iteration is captured once per
// control-flow path as a template, and each further iteration on that path
// is recorded as a single path node bound to the values flowing in.

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tessera/lineage/lineage.hpp"

namespace tessera::lineage {

class LoopDeduplicator {
public:
    struct Stats {
        std::int64_t templates = 0;
        std::int64_t path_nodes = 0;
        std::int64_t eager_iterations = 0;
        std::int64_t disabled_sites = 0;
    };

    explicit LoopDeduplicator(Tracer& tracer, std::size_t max_paths = 8);

    /// Starts capturing an iteration of the loop at `site`. Returns false
    /// (and captures nothing) when another iteration is being captured or
    /// the site exceeded the path limit.
    bool begin_iteration(const std::string& site);
    bool active() const noexcept { return active_; }
    /// Control-flow decision inside the iteration (branch taken, loop step).
    void record_decision(char decision);
    /// Replaces the lineage of variables defined in the iteration by outputs
    /// of one path node.
    void end_iteration(const std::vector<std::pair<std::string, LineageRef*>>& vars);
    void abort_iteration() noexcept { active_ = false; }

    const Stats& stats() const noexcept { return stats_; }
    const PathTemplate* find_template(const std::string& site, const std::string& path_id) const;
    std::size_t num_paths(const std::string& site) const;

private:
    struct Site {
        std::map<std::string, std::shared_ptr<const PathTemplate>> paths;
        bool disabled = false;
    };

    bool internal(const LineageItem& n) const noexcept {
        return n.id() >= start_id_ && n.kind() != NodeKind::Seed;
    }

    Tracer& tracer_;
    std::size_t max_paths_;
    std::map<std::string, Site> sites_;
    bool active_ = false;
    std::string site_;
    std::string decisions_;
    std::int64_t start_id_ = 0;
    Stats stats_;
};

} // namespace tessera::lineage
