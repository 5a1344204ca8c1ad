#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hdboot/bootstrap.hpp"
#include "hdboot/config.hpp"
#include "hdboot/covariance.hpp"
#include "hdboot/csv.hpp"
#include "hdboot/diagnostics.hpp"

namespace hdboot {

/// Worker count: the explicit value if nonzero, else HDBOOT_THREADS, else the
/// hardware concurrency (at least 1).
std::size_t resolve_threads(std::size_t requested);

/// Runs body(0..count-1) on `threads` workers. The first exception thrown by
/// any call is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

/// Data-generating design shared by all replicates of an experiment.
struct Design {
    CovMatrix latent;  ///< covariance of the Gaussian layer Y
    CovMatrix truth;   ///< covariance of the copula data X
    MarginalKind marginal = MarginalKind::UniformSym;
    bool standardize = true;

    /// Block covariance with the permutation drawn from sub-stream 0 of cfg.seed.
    static Design from_config(const ExperimentConfig& cfg);
    /// n observations with mean zero.
    [[nodiscard]] DataMatrix sample(std::size_t n, const RngSeed& seed) const;
};

/// Bootstrap draws of one engine for every exponent in cfg.p_list.
/// Engines: proxy (true covariance), gmb, and any EstimatorSpec text for the
/// parametric bootstrap. Estimation uses seed.child(0), draws seed.child(1).
std::vector<EmpiricalDistribution> engine_draws(const std::string& engine, const DataMatrix& x, const Design& design,
                                                const ExperimentConfig& cfg, const RngSeed& seed);

/// ||sqrt(n) mean(x)||_p for every exponent in p_list.
std::vector<double> mean_statistics(const DataMatrix& x, const std::vector<LpExponent>& p_list);

struct KsRecord {
    std::size_t rep = 0;
    std::string p;
    std::string estimator;
    double ks = 0.0;
};

struct KsResult {
    std::vector<KsRecord> records;

    /// Columns rep,p,estimator,ks.
    [[nodiscard]] CsvTable table() const;
    [[nodiscard]] double median(const std::string& p, const std::string& estimator) const;
};

struct CoverageRecord {
    std::size_t rep = 0;
    std::string p;
    std::string estimator;
    double statistic = 0.0;
    double quantile = 0.0;
    bool covered = false;
};

struct CoverageSummary {
    std::string p;
    std::string estimator;
    std::size_t covered = 0;
    std::size_t reps = 0;
    double coverage = 0.0;
    double mc_se = 0.0;
};

struct CoverageResult {
    std::vector<CoverageRecord> records;
    std::vector<CoverageSummary> summaries;

    /// Columns row_type,rep,p,estimator,statistic,quantile,covered,coverage,mc_se;
    /// "rep" rows leave coverage and mc_se empty, "summary" rows leave rep,
    /// statistic, quantile and covered empty.
    [[nodiscard]] CsvTable table() const;
    [[nodiscard]] const CoverageSummary& summary(const std::string& p, const std::string& estimator) const;
};

struct PowerRecord {
    std::size_t delta_index = 0;
    double delta = 0.0;
    std::string p;
    std::string estimator;
    std::size_t rejections = 0;
    std::size_t reps = 0;
    double power = 0.0;
    double mc_se = 0.0;
};

struct PowerResult {
    std::vector<double> delta_grid;
    std::vector<PowerRecord> records;

    /// Columns delta,p,estimator,rejections,reps,power,mc_se.
    [[nodiscard]] CsvTable table() const;
    [[nodiscard]] const PowerRecord& at(std::size_t delta_index, const std::string& p,
                                        const std::string& estimator) const;
};

struct ProbeResult {
    std::vector<ProbeReport> reports;

    /// Columns of ProbeReport::csv_header().
    [[nodiscard]] CsvTable table() const;
};

/// Distance between the law of T_{n,p} (truth_reps simulated data sets) and
/// each engine's bootstrap law, for every replicate, exponent and engine.
KsResult run_ks_experiment(const ExperimentConfig& cfg);

/// Indicator T_{n,p} <= c*(1 - alpha) under mu = 0, per replicate, exponent and engine.
CoverageResult run_coverage_experiment(const ExperimentConfig& cfg);

/// Rejection frequency under mu(delta) = delta (1,...,1) (dense) or delta on
/// the first sparse_support() coordinates (sparse). Each replicate draws one
/// zero-mean data set and shifts it by mu(delta), so the critical values are
/// computed once per replicate and shared across the grid.
PowerResult run_power_experiment(const ExperimentConfig& cfg);

/// Levy concentration on identity and block covariances for every
/// (d, p, eps), and Gaussian comparison of I_d against c I_d for c in probe_scales.
ProbeResult run_probe_experiment(const ExperimentConfig& cfg);

/// Dispatches on cfg.kind.
CsvTable run_experiment(const ExperimentConfig& cfg);

}  // namespace hdboot
