#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "forest.hpp"
#include "molecule.hpp"
#include "rational.hpp"

namespace molred {

enum class StepKind : std::uint8_t {
    DA,
    TB1,
    TB2,
    BR,
    S3S3_1,
    S3S3_2G,
    S3S3_3G,
    S3S3_4G,
    S3S3_5G,
    D3D3_1,
    D3D3_2G,
    D3D3_3G,
    D3D3_4G,
    D3D3_5G,
    D3D3_6G,
    D3D4G,
    S3S2G,
    R3_1,
    R3_2G,
    R2_1,
    R2_2G,
    R2_3,
    R2_4,
    R2_5,
};

const char* step_kind_name(StepKind k);
std::optional<StepKind> step_kind_from_name(const std::string& name);

// Ledger row for the step kinds that appear in the Delta table. delta_gamma is
// delta_chi plus a kind-specific increment; a zero increment marks a normal
// step, a positive one a good step.
struct TableRow {
    std::vector<int> chi_set;
    int inc_num = 0;  // increment = inc_num / (inc_den_factor * (d-1)), 0 when normal
    int inc_den_factor = 1;
    Rat kappa;

    Rat increment(int d) const {
        if (inc_num == 0) return Rat(0);
        return Rat(inc_num, static_cast<std::int64_t>(inc_den_factor) * (d - 1));
    }
};

// nullopt for DA, BR, TB1, TB2: the table does not list them, their records
// carry delta_gamma = delta_chi, delta_kappa = 0 and are flagged unchecked.
std::optional<TableRow> step_table_row(StepKind k, int d);

inline Rat good_step_threshold(int d) { return Rat(1, 6LL * (d - 1)); }

struct StepRecord {
    int index = 0;
    StepKind kind = StepKind::DA;
    std::vector<int> atoms_removed;   // atom indices
    std::vector<int> bonds_removed;   // bond ids, ascending
    std::vector<Bond> bonds_injected;
    std::vector<int> g_edges_added;
    std::vector<int> g_edges_rejected;
    int delta_chi_computed = 0;
    Rat delta_gamma;
    Rat delta_kappa;
    int checkpoint = -1;  // -1 none, 0 first branch, 1 second branch
    bool table_unchecked = false;

    void soft_clear() {
        atoms_removed.clear();
        bonds_removed.clear();
        bonds_injected.clear();
        g_edges_added.clear();
        g_edges_rejected.clear();
        delta_chi_computed = 0;
        delta_gamma = Rat(0);
        delta_kappa = Rat(0);
        checkpoint = -1;
        table_unchecked = false;
    }
};

// Step log plus the running exact-rational ledger. Record slots are pooled so
// a Trace can be reset and refilled without reallocating.
class Trace {
public:
    int dimension = 3;
    std::vector<int> chi_history;  // chi after each step
    Rat gamma_total;
    Rat kappa_total;

    void reset(int d) {
        dimension = d;
        count_ = 0;
        chi_history.clear();
        gamma_total = Rat(0);
        kappa_total = Rat(0);
    }
    StepRecord& push() {
        if (count_ == pool_.size()) pool_.emplace_back();
        StepRecord& r = pool_[count_];
        r.soft_clear();
        r.index = static_cast<int>(count_++);
        return r;
    }
    std::span<const StepRecord> steps() const { return {pool_.data(), count_}; }
    std::span<StepRecord> steps() { return {pool_.data(), count_}; }
    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }

private:
    std::vector<StepRecord> pool_;
    std::size_t count_ = 0;
};

struct ReductionConfig {
    // Stand-ins for conditions the source rules leave to external definitions.
    bool cond_i = true;
    bool cond_ii = true;
    bool has_special_bond = false;
    std::function<bool(const Molecule&, int, int)> functional_group_matcher;  // optional
    bool allow_initial_triple_bonds = false;
};

enum class Policy : std::uint8_t { First, Second, Random };

struct StepDescriptor {
    StepKind kind = StepKind::DA;
    int a = -1;  // primary atom (or bond tail for BR)
    int b = -1;  // partner atom when the step acts on a pair
    int aux0 = -1, aux1 = -1;  // extra atoms (3D3-6G, 3R-2G)
    int checkpoint = -1;       // branch tag when offered at a checkpoint
};

struct ScriptStep {
    StepKind kind;
    std::vector<std::string> targets;  // atom ids ("at" or "bond" endpoints)
};

struct Script {
    std::vector<ScriptStep> steps;
};

enum class RunStatus : std::uint8_t {
    Ok,
    InitialTripleBond,
    Stuck,
    ScriptPrecondition,
    PathCapExceeded,
};

struct RunResult {
    RunStatus status = RunStatus::Ok;
    std::string message;
    int at_index = -1;

    bool ok() const { return status == RunStatus::Ok; }
};

class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Phase 1 / Phase 2 driver. Holds scratch buffers so one instance can run
// many reductions without reallocating; not thread-safe across runs.
class Reducer {
public:
    ReductionConfig config;

    enum class Match : std::uint8_t { Step, Done, Stuck };

    // Fills `out` with 1 descriptor, or 2 at a checkpoint (first branch first).
    Match match_next(const Molecule& m, std::vector<StepDescriptor>& out);

    // Mutates molecule and forest, appends the record. Throws PreconditionError
    // when the descriptor does not match the current molecule.
    const StepRecord& apply_step(Molecule& m, ForestState& f, const StepDescriptor& d, Trace& t);

    void phase1(Molecule& m, ForestState& f, Trace& t);

    RunResult run(Molecule& m, ForestState& f, Trace& t, Policy policy, std::uint64_t seed,
                  int dimension);

    RunResult run_scripted(Molecule& m, ForestState& f, Trace& t, const Script& script,
                           int dimension, bool continue_after = true);

    struct Path {
        RunResult result;
        Trace trace;
        ForestState forest;
    };
    struct ExhaustiveResult {
        std::vector<Path> paths;
        bool cap_exceeded = false;
    };
    // Depth-first over checkpoints, first branch explored first; stops
    // collecting once `path_cap` paths have completed.
    ExhaustiveResult run_exhaustive(const Molecule& m, int dimension, int path_cap);

private:
    std::vector<int> scratch_bonds_;
    std::vector<int> scratch_bonds2_;
    std::vector<int> removal_bonds_;
    std::vector<int> removal_atoms_;
    std::vector<StepDescriptor> options_;
    std::mt19937_64 rng_;

    struct PairInfo {
        int l2 = -1, v3 = -1;  // lowest extra bond/neighbor of a
        int l3 = -1, v4 = -1;  // second extra of a (3S3 only)
        int l4 = -1, v5 = -1;  // lowest extra of b
        int l5 = -1, v6 = -1;  // second extra of b (3S3 only)
    };
    PairInfo pair_info(const Molecule& m, int a, int b) const;

    int removal_delta_chi(const Molecule& m, std::span<const int> atoms) const;
    bool injection_fits(const Molecule& m, int from, int to, std::span<const int> doomed_atoms) const;
    void classify_3s3(const Molecule& m, int v1, int v2, std::vector<StepDescriptor>& out);
    void classify_3d3(const Molecule& m, int v1, int v2, std::vector<StepDescriptor>& out);
    bool match_fig30(const Molecule& m, int v1, int v2, int v3, int v4) const;
    StepDescriptor resolve_script_step(const Molecule& m, const ScriptStep& s) const;

    RunResult loop(Molecule& m, ForestState& f, Trace& t, Policy policy);
    void finish_record(const Molecule& m, ForestState& f, Trace& t, StepRecord& r, int chi_before);
};

// One-shot conveniences over a fresh Reducer.
RunResult run_reduction(Molecule& m, ForestState& f, Trace& t, const ReductionConfig& cfg,
                        Policy policy, std::uint64_t seed, int dimension);
RunResult run_scripted(Molecule& m, ForestState& f, Trace& t, const Script& script,
                       const ReductionConfig& cfg, int dimension, bool continue_after = true);

struct LedgerReport {
    std::vector<std::pair<int, std::string>> violations;  // step index, message
    bool ok() const { return violations.empty(); }
};

LedgerReport ledger_check(const Trace& trace, int d);
std::pair<Rat, Rat> bound_exponents(const Trace& trace);

}  // namespace molred
