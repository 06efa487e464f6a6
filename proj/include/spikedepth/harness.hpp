#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

namespace spikedepth::harness {

enum class Experiment { Sim1, Sim2, Sim3, Sim4, Sim5, ClassHppIpp, ClassIppHawkes, DdGauss };

Experiment parse_experiment(const std::string& name);
std::string experiment_name(Experiment id);

struct ExperimentSpec {
    Experiment id = Experiment::Sim1;
    std::size_t reps = 20;
    std::uint64_t seed = 20240101;
    // detection thresholds; the classification studies use only the first
    std::vector<double> deltas = {0.001, 0.005, 0.01};
    double r = 1.0;
    double mu = 20.0;
    std::size_t degree = 5;
    std::size_t n_mc = 100000;
    // delta of the outlier-removal pass in the classification studies
    std::optional<double> remove_outliers;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::string output_dir = ".";

    /// Study sizes and degree as used for `id`.
    static ExperimentSpec defaults(Experiment id);
    void validate() const;
    nlohmann::json to_json() const;
};

/// Seed of one random role within one repetition.
std::uint64_t rep_seed(std::uint64_t base, std::size_t rep, std::uint64_t role);

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<std::string> columns;
    // one row per repetition, in repetition order
    std::vector<std::vector<double>> rows;

    struct Stat {
        std::string column;
        double mean;
        double sd;
        double median;
    };
    std::vector<Stat> summary() const;
    Stat stat(const std::string& column) const;
    std::vector<double> column(const std::string& name) const;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Runs a single repetition; the row matches `run_experiment(spec).rows[rep]`.
std::vector<double> run_repetition(const ExperimentSpec& spec, std::size_t rep,
                                   std::vector<std::string>* columns = nullptr);

/// Writes `<id>_reps.csv`, `<id>_summary.csv` and `<id>.json` into the output directory.
void write_result(const ExperimentResult& result);
std::string reps_csv(const ExperimentResult& result);
std::string summary_csv(const ExperimentResult& result);

/// Worker count from SPIKEDEPTH_WORKERS, else the hardware concurrency.
std::size_t worker_count();

/// fn(i) for i in [0, n) on up to `workers` threads; results kept in index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, std::size_t workers, Fn&& fn)
{
    std::vector<T> out(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(n, 1));
    if (threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace spikedepth::harness
