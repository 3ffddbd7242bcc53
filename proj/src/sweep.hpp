#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "couple.hpp"
#include "forest.hpp"
#include "molecule.hpp"
#include "reduction.hpp"
#include "verify.hpp"

namespace molred {

// Corpus sweeps: run the reduction over many couples and verify every trace.
// The enumeration sweep is the data-parallel kernel of the project; it is
// parallelized with OpenMP over shape blocks, and a serial reference walk of
// the same per-couple routine is kept for testing and benchmarking.

struct SweepConfig {
    int max_total_internal = 6;

    int random_count = 500;
    int random_min_total = 4;
    int random_max_total = 20;
    std::uint64_t random_seed = 1;

    int dimension = 3;

    // Brute-force spanning-tree membership is checked for every couple with
    // total internal count <= brute_force_full_max, and for every
    // brute_force_stride-th matching above that (0 turns sampling off).
    int brute_force_full_max = 5;
    int brute_force_stride = 8;

    // Per-couple policies: First always runs; when its trace hits a
    // checkpoint, Second and Random x3 seeds run as well (policies only
    // diverge at checkpoints, so checkpoint-free couples need one run).
    bool all_policies = true;

    bool parallel = true;
    std::size_t max_failure_samples = 20;
};

struct SweepStats {
    std::uint64_t couples = 0;
    std::uint64_t runs = 0;
    std::uint64_t steps = 0;
    std::uint64_t base_profile_checked = 0;
    std::uint64_t verified = 0;
    std::uint64_t ledger_steps_checked = 0;
    std::uint64_t forest_decisions = 0;  // DSU answers re-decided by DFS
    std::uint64_t brute_force_checked = 0;
    std::uint64_t checkpoint_couples = 0;

    // failures by category, for per-criterion reporting
    std::uint64_t fail_run = 0;        // reduction did not finish
    std::uint64_t fail_spanning = 0;   // final forest not a spanning tree
    std::uint64_t fail_budget = 0;     // more than 2n steps
    std::uint64_t fail_replay = 0;     // DFS replay disagreed with the trace
    std::uint64_t fail_table = 0;      // ledger off the table
    std::uint64_t fail_maximality = 0;
    std::uint64_t fail_injected = 0;
    std::uint64_t fail_base = 0;       // base-molecule proposition broken
    std::uint64_t fail_brute = 0;      // tree missing from the oracle list
    std::uint64_t failures = 0;
    std::vector<std::string> failure_samples;

    bool ok() const { return failures == 0; }
    void merge(const SweepStats& other, std::size_t max_samples);
};

SweepStats sweep_enumeration(const SweepConfig& cfg);
// Same walk without OpenMP; the kernel's reference implementation.
SweepStats sweep_enumeration_serial(const SweepConfig& cfg);

SweepStats sweep_random(const SweepConfig& cfg);

// Per-couple routine shared by the sweeps (exposed for tests).
class SweepWorker {
public:
    explicit SweepWorker(const SweepConfig& cfg);
    void process_couple(const Couple& c, bool brute_check, SweepStats& stats);

private:
    SweepConfig cfg_;
    Reducer reducer_;
    Molecule original_;
    Molecule work_;
    ForestState forest_;
    Trace trace_;
    TraceVerifier verifier_;
    std::vector<int> tree_edges_;

    void process_couple_impl(const Couple& c, bool brute_check, SweepStats& stats);
    void fail(SweepStats& stats, const Couple& c, const std::string& message);
    bool run_one(const Couple& c, Policy policy, std::uint64_t seed, bool brute_check,
                 const std::vector<std::vector<int>>* trees, SweepStats& stats,
                 bool& saw_checkpoint);
};

}  // namespace molred
