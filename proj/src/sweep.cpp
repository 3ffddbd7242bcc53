#include "sweep.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "io.hpp"

namespace molred {

void SweepStats::merge(const SweepStats& other, std::size_t max_samples) {
    couples += other.couples;
    runs += other.runs;
    steps += other.steps;
    base_profile_checked += other.base_profile_checked;
    verified += other.verified;
    ledger_steps_checked += other.ledger_steps_checked;
    forest_decisions += other.forest_decisions;
    brute_force_checked += other.brute_force_checked;
    checkpoint_couples += other.checkpoint_couples;
    fail_run += other.fail_run;
    fail_spanning += other.fail_spanning;
    fail_budget += other.fail_budget;
    fail_replay += other.fail_replay;
    fail_table += other.fail_table;
    fail_maximality += other.fail_maximality;
    fail_injected += other.fail_injected;
    fail_base += other.fail_base;
    fail_brute += other.fail_brute;
    failures += other.failures;
    for (const auto& s : other.failure_samples)
        if (failure_samples.size() < max_samples) failure_samples.push_back(s);
}

SweepWorker::SweepWorker(const SweepConfig& cfg) : cfg_(cfg) {
    reducer_.config.allow_initial_triple_bonds = true;
}

void SweepWorker::fail(SweepStats& stats, const Couple& c, const std::string& message) {
    ++stats.failures;
    if (stats.failure_samples.size() < cfg_.max_failure_samples)
        stats.failure_samples.push_back(message + "\ncouple: " + couple_to_json(c));
}

bool SweepWorker::run_one(const Couple& c, Policy policy, std::uint64_t seed, bool brute_check,
                          const std::vector<std::vector<int>>* trees, SweepStats& stats,
                          bool& saw_checkpoint) {
    work_ = original_;
    RunResult result = reducer_.run(work_, forest_, trace_, policy, seed, cfg_.dimension);
    ++stats.runs;
    stats.steps += trace_.size();
    if (!result.ok()) {
        ++stats.fail_run;
        fail(stats, c, std::string("reduction failed: ") + result.message);
        return false;
    }
    if (!forest_.is_spanning_tree()) {
        ++stats.fail_spanning;
        fail(stats, c, "final forest is not a spanning tree");
        return false;
    }
    if (trace_.size() > 2 * static_cast<std::size_t>(original_.atom_count())) {
        ++stats.fail_budget;
        fail(stats, c, "trace exceeds 2 x atom count steps");
        return false;
    }
    for (const StepRecord& r : trace_.steps()) {
        saw_checkpoint |= r.checkpoint >= 0;
        stats.forest_decisions += r.bonds_removed.size();
        if (step_table_row(r.kind, cfg_.dimension)) ++stats.ledger_steps_checked;
    }
    VerificationReport report = verifier_.verify(original_, trace_, cfg_.dimension);
    if (!report.all_ok()) {
        stats.fail_replay += !report.replay_ok;
        stats.fail_table += !report.table_ok;
        stats.fail_maximality += !report.maximality_ok;
        stats.fail_injected += !report.injected_ok;
        stats.fail_spanning += !report.spanning_tree_ok;
        std::string msg = "verification failed:";
        for (std::size_t i = 0; i < report.failures.size() && i < 4; ++i)
            msg += " [" + std::to_string(report.failures[i].first) + "] " +
                   report.failures[i].second + ";";
        fail(stats, c, msg);
        return false;
    }
    ++stats.verified;

    if (brute_check && trees) {
        tree_edges_.clear();
        for (const ForestEdge& e : forest_.edges()) tree_edges_.push_back(e.bond_id);
        std::sort(tree_edges_.begin(), tree_edges_.end());
        if (std::find(trees->begin(), trees->end(), tree_edges_) == trees->end()) {
            ++stats.fail_brute;
            fail(stats, c, "final tree is not in the brute-force spanning tree list");
            return false;
        }
        ++stats.brute_force_checked;
    }
    return true;
}

void SweepWorker::process_couple(const Couple& c, bool brute_check, SweepStats& stats) {
    // exceptions must not escape the parallel region; anything thrown here is
    // a bug worth a failure record, not a terminate
    try {
        process_couple_impl(c, brute_check, stats);
    } catch (const std::exception& e) {
        ++stats.fail_run;
        fail(stats, c, std::string("exception: ") + e.what());
    }
}

void SweepWorker::process_couple_impl(const Couple& c, bool brute_check, SweepStats& stats) {
    ++stats.couples;
    original_ = molecule_from_couple(c);

    // base-molecule proposition on every generated molecule
    const int n = c.total_internal();
    auto base = original_.is_base_molecule();
    bool caps_ok = true;
    for (int a = 0; a < original_.atom_slots(); ++a)
        caps_ok &= original_.in_degree(a) <= 2 && original_.out_degree(a) <= 2;
    bool mult_ok = true;
    for (const auto& mult : original_.find_multiplicities()) mult_ok &= mult.count <= 3;
    if (original_.atom_count() != n || original_.bond_count() != 2 * n - 1 || !base.is_base ||
        !caps_ok || !mult_ok) {
        ++stats.fail_base;
        fail(stats, c, "generated molecule violates the base-molecule proposition");
        return;
    }
    ++stats.base_profile_checked;

    std::vector<std::vector<int>> trees;
    const std::vector<std::vector<int>>* trees_ptr = nullptr;
    if (brute_check && original_.atom_count() <= 10) {
        trees = brute_force_spanning_trees(original_);
        trees_ptr = &trees;
    }

    bool saw_checkpoint = false;
    if (!run_one(c, Policy::First, 0, trees_ptr != nullptr, trees_ptr, stats, saw_checkpoint))
        return;
    if (saw_checkpoint && cfg_.all_policies) {
        ++stats.checkpoint_couples;
        bool ignored = false;
        if (!run_one(c, Policy::Second, 0, trees_ptr != nullptr, trees_ptr, stats, ignored))
            return;
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL})
            if (!run_one(c, Policy::Random, seed, trees_ptr != nullptr, trees_ptr, stats,
                         ignored))
                return;
    }
}

namespace {

bool block_brute_check(const SweepConfig& cfg, const ShapeBlock& block, int match_index) {
    int total = block.n_plus + block.n_minus;
    if (total <= cfg.brute_force_full_max) return true;
    return cfg.brute_force_stride > 0 && match_index % cfg.brute_force_stride == 0;
}

}  // namespace

SweepStats sweep_enumeration(const SweepConfig& cfg) {
    std::vector<ShapeBlock> blocks = enumerate_shape_blocks(cfg.max_total_internal);
    SweepStats stats;
#ifdef _OPENMP
    if (cfg.parallel) {
#pragma omp parallel
        {
            SweepWorker worker(cfg);
            SweepStats local;
#pragma omp for schedule(dynamic, 4)
            for (long i = 0; i < static_cast<long>(blocks.size()); ++i) {
                int match_index = 0;
                for_each_matching(blocks[i], [&](const Couple& c) {
                    worker.process_couple(c, block_brute_check(cfg, blocks[i], match_index),
                                          local);
                    ++match_index;
                });
            }
#pragma omp critical
            stats.merge(local, cfg.max_failure_samples);
        }
        return stats;
    }
#endif
    return sweep_enumeration_serial(cfg);
}

SweepStats sweep_enumeration_serial(const SweepConfig& cfg) {
    std::vector<ShapeBlock> blocks = enumerate_shape_blocks(cfg.max_total_internal);
    SweepStats stats;
    SweepWorker worker(cfg);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        int match_index = 0;
        for_each_matching(blocks[i], [&](const Couple& c) {
            worker.process_couple(c, block_brute_check(cfg, blocks[i], match_index), stats);
            ++match_index;
        });
    }
    return stats;
}

SweepStats sweep_random(const SweepConfig& cfg) {
    SweepStats stats;
    const int span = std::max(1, cfg.random_max_total - cfg.random_min_total + 1);
#ifdef _OPENMP
    if (cfg.parallel) {
#pragma omp parallel
        {
            SweepWorker worker(cfg);
            SweepStats local;
#pragma omp for schedule(dynamic, 16)
            for (long i = 0; i < cfg.random_count; ++i) {
                std::uint64_t seed = cfg.random_seed + static_cast<std::uint64_t>(i) * 1000003;
                int total = cfg.random_min_total + static_cast<int>(seed % span);
                int n_plus = 1 + static_cast<int>((seed / 7) % (total - 1));
                Couple c = random_couple(n_plus, total - n_plus, seed);
                worker.process_couple(c, c.total_internal() <= 10, local);
            }
#pragma omp critical
            stats.merge(local, cfg.max_failure_samples);
        }
        return stats;
    }
#endif
    SweepWorker worker(cfg);
    for (long i = 0; i < cfg.random_count; ++i) {
        std::uint64_t seed = cfg.random_seed + static_cast<std::uint64_t>(i) * 1000003;
        int total = cfg.random_min_total + static_cast<int>(seed % span);
        int n_plus = 1 + static_cast<int>((seed / 7) % (total - 1));
        Couple c = random_couple(n_plus, total - n_plus, seed);
        worker.process_couple(c, c.total_internal() <= 10, stats);
    }
    return stats;
}

}  // namespace molred
