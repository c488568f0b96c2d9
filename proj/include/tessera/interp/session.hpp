// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0
//
// An interpreter session: symbol table, lineage trace, reuse cache and
// execution statistics shared by the scripts it runs.

#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "tessera/interp/program.hpp"
#include "tessera/interp/value.hpp"
#include "tessera/lineage/dedup.hpp"
#include "tessera/reuse/cache.hpp"

namespace tessera::interp {

enum class LineageMode { None, Trace, ReuseFull, ReusePartial };

std::optional<LineageMode> parse_lineage_mode(std::string_view text);
const char* to_string(LineageMode mode);

struct SessionConfig {
    LineageMode lineage = LineageMode::Trace;
    int threads = 0; // 0 keeps the process setting
    std::size_t cache_bytes = std::size_t{1} << 30;
    std::uint64_t seed = 7;
    bool dedup = true;
    CompileOptions compile;
    std::ostream* out = nullptr; // print() target, std::cout when null
};

struct OpStats {
    std::int64_t count = 0;
    double millis = 0.0;
};

struct ExecStats {
    /// Kernel executions per opcode, including kernels run by partial-reuse plans.
    std::map<std::string, OpStats, std::less<>> ops;
    std::int64_t instructions = 0;
    std::int64_t function_calls = 0;
    std::int64_t bytes_read = 0;
    std::int64_t bytes_written = 0;
    std::int64_t fed_collects = 0;

    std::int64_t count(std::string_view opcode) const;
};

class Executor;

class Session {
public:
    explicit Session(SessionConfig config = {});
    ~Session();
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    /// Binds a variable visible to later scripts, traced as a named input.
    void set_input(const std::string& name, Value value);

    /// Parses, compiles and executes a script. `outputs` names the variables
    /// the caller reads afterwards; other dead assignments may be removed.
    /// Without it every top-level variable is kept.
    void run(std::string_view script, const std::optional<std::set<std::string>>& outputs = std::nullopt,
             const std::map<std::string, std::string>& nvargs = {});

    bool has(const std::string& name) const;
    /// Names of the bound top-level variables, sorted, without the
    /// renamed locals of inlined functions.
    std::vector<std::string> variables() const;
    const Value& get(const std::string& name) const;
    TensorPtr tensor(const std::string& name) const;
    Scalar scalar(const std::string& name) const;
    lineage::LineageRef lineage_of(const std::string& name) const;
    /// Serialized trace of the named variables.
    std::string trace(const std::vector<std::string>& names) const;

    const SessionConfig& config() const noexcept;
    const ExecStats& stats() const noexcept;
    void reset_stats();
    reuse::CacheStats cache_stats() const;
    const reuse::ReuseCache& cache() const;
    lineage::Tracer& tracer();
    const lineage::LoopDeduplicator& dedup() const;
    /// Statistics table as printed by the command line.
    std::string report() const;

private:
    std::unique_ptr<Executor> exec_;
};

} // namespace tessera::interp
