#include "hdboot/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "hdboot/sampling.hpp"

namespace hdboot {

namespace {

enum SeedBranch : std::uint64_t { kPermutation = 0, kReplicate = 1, kTruth = 2, kProbe = 3 };

CvOptions cv_options(const ExperimentConfig& cfg) {
    return CvOptions{CvOptions::uniform_grid(cfg.cv_grid_points), cfg.cv_folds};
}

std::vector<std::string> p_labels(const ExperimentConfig& cfg) {
    std::vector<std::string> out;
    for (const auto& p : cfg.p_list) out.push_back(p.to_string());
    return out;
}

double binomial_se(double rate, std::size_t reps) {
    return std::sqrt(rate * (1.0 - rate) / static_cast<double>(reps));
}

double median_of(std::vector<double> values) {
    if (values.empty()) throw std::out_of_range("median: no matching records");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HDBOOT_THREADS")) {
        char* end = nullptr;
        const unsigned long value = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && value > 0) return static_cast<std::size_t>(value);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

Design Design::from_config(const ExperimentConfig& cfg) {
    Design design;
    design.latent = build_block_covariance(cfg.d, cfg.block_size(), cfg.decay, RngSeed(cfg.seed).child(kPermutation));
    design.truth = copula_covariance(design.latent, cfg.marginal, cfg.standardize);
    design.marginal = cfg.marginal;
    design.standardize = cfg.standardize;
    return design;
}

DataMatrix Design::sample(std::size_t n, const RngSeed& seed) const {
    RngStream stream(seed);
    return copula_sample(latent, marginal, n, stream, standardize);
}

std::vector<EmpiricalDistribution> engine_draws(const std::string& engine, const DataMatrix& x, const Design& design,
                                                const ExperimentConfig& cfg, const RngSeed& seed) {
    const std::span<const LpExponent> ps(cfg.p_list);
    if (engine == "proxy") return proxy_draws(design.truth, ps, cfg.B, seed.child(1));
    if (engine == "gmb") {
        return gmb_draws(x, ps, cfg.B, seed.child(1),
                         cfg.gmb_via_covariance ? GmbMode::ViaCovariance : GmbMode::Multipliers);
    }
    EstimatorSpec spec = EstimatorSpec::parse(engine);
    spec.cv = cv_options(cfg);
    const CovMatrix sigma_hat = estimate_covariance(x, spec, seed.child(0));
    return gpb_draws(sigma_hat, ps, cfg.B, seed.child(1));
}

std::vector<double> mean_statistics(const DataMatrix& x, const std::vector<LpExponent>& p_list) {
    const Eigen::VectorXd scaled = std::sqrt(static_cast<double>(x.rows())) * x.colwise().mean().transpose();
    const std::span<const double> view(scaled.data(), static_cast<std::size_t>(scaled.size()));
    std::vector<double> out;
    out.reserve(p_list.size());
    for (const auto& p : p_list) out.push_back(lp_norm(view, p));
    return out;
}

CsvTable KsResult::table() const {
    CsvTable t{{"rep", "p", "estimator", "ks"}, {}};
    for (const auto& r : records) t.add_row({std::to_string(r.rep), r.p, r.estimator, format_number(r.ks)});
    return t;
}

double KsResult::median(const std::string& p, const std::string& estimator) const {
    std::vector<double> values;
    for (const auto& r : records) {
        if (r.p == p && r.estimator == estimator) values.push_back(r.ks);
    }
    return median_of(std::move(values));
}

CsvTable CoverageResult::table() const {
    CsvTable t{{"row_type", "rep", "p", "estimator", "statistic", "quantile", "covered", "coverage", "mc_se"}, {}};
    for (const auto& r : records) {
        t.add_row({"rep", std::to_string(r.rep), r.p, r.estimator, format_number(r.statistic), format_number(r.quantile),
                   r.covered ? "1" : "0", "", ""});
    }
    for (const auto& s : summaries) {
        t.add_row({"summary", "", s.p, s.estimator, "", "", "", format_number(s.coverage), format_number(s.mc_se)});
    }
    return t;
}

const CoverageSummary& CoverageResult::summary(const std::string& p, const std::string& estimator) const {
    for (const auto& s : summaries) {
        if (s.p == p && s.estimator == estimator) return s;
    }
    throw std::out_of_range("coverage: no summary for p=" + p + ", estimator=" + estimator);
}

CsvTable PowerResult::table() const {
    CsvTable t{{"delta", "p", "estimator", "rejections", "reps", "power", "mc_se"}, {}};
    for (const auto& r : records) {
        t.add_row({format_number(r.delta), r.p, r.estimator, std::to_string(r.rejections), std::to_string(r.reps),
                   format_number(r.power), format_number(r.mc_se)});
    }
    return t;
}

const PowerRecord& PowerResult::at(std::size_t delta_index, const std::string& p, const std::string& estimator) const {
    for (const auto& r : records) {
        if (r.delta_index == delta_index && r.p == p && r.estimator == estimator) return r;
    }
    throw std::out_of_range("power: no record for the requested delta, p and estimator");
}

CsvTable ProbeResult::table() const {
    CsvTable t;
    std::size_t pos = 0;
    const std::string header = ProbeReport::csv_header();
    while (pos <= header.size()) {
        const auto comma = std::min(header.find(',', pos), header.size());
        t.header.push_back(header.substr(pos, comma - pos));
        pos = comma + 1;
    }
    for (const auto& r : reports) {
        t.add_row({r.probe, r.instance, format_number(r.estimate), format_number(r.bound), format_number(r.C),
                   format_number(r.slack), std::to_string(r.n_mc), r.pass ? "1" : "0"});
    }
    return t;
}

KsResult run_ks_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const Design design = Design::from_config(cfg);
    const std::size_t threads = resolve_threads(cfg.threads);
    const RngSeed root(cfg.seed);
    const std::size_t np = cfg.p_list.size();

    // Law of T_{n,p} from independent data sets.
    std::vector<std::vector<double>> truth(np, std::vector<double>(cfg.truth_reps));
    parallel_for(cfg.truth_reps, threads, [&](std::size_t t) {
        const auto stats = mean_statistics(design.sample(cfg.n, root.child(kTruth).child(t)), cfg.p_list);
        for (std::size_t i = 0; i < np; ++i) truth[i][t] = stats[i];
    });
    std::vector<EmpiricalDistribution> truth_laws;
    for (std::size_t i = 0; i < np; ++i) {
        truth_laws.emplace_back(std::move(truth[i]), DrawMeta{"truth", cfg.p_list[i].to_string(), cfg.truth_reps,
                                                              root.child(kTruth).to_string()});
    }

    const auto labels = p_labels(cfg);
    const std::size_t ne = cfg.estimators.size();
    std::vector<std::vector<KsRecord>> per_rep(cfg.mc_reps);
    parallel_for(cfg.mc_reps, threads, [&](std::size_t rep) {
        const RngSeed rep_seed = root.child(kReplicate).child(rep);
        const DataMatrix x = design.sample(cfg.n, rep_seed.child(0));
        for (std::size_t e = 0; e < ne; ++e) {
            const auto draws = engine_draws(cfg.estimators[e], x, design, cfg, rep_seed.child(1 + e));
            for (std::size_t i = 0; i < np; ++i) {
                per_rep[rep].push_back({rep, labels[i], cfg.estimators[e], ks_distance(truth_laws[i], draws[i])});
            }
        }
    });

    KsResult result;
    for (auto& rows : per_rep) result.records.insert(result.records.end(), rows.begin(), rows.end());
    return result;
}

CoverageResult run_coverage_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const Design design = Design::from_config(cfg);
    const RngSeed root(cfg.seed);
    const auto labels = p_labels(cfg);
    const std::size_t np = cfg.p_list.size();
    const std::size_t ne = cfg.estimators.size();

    std::vector<std::vector<CoverageRecord>> per_rep(cfg.mc_reps);
    parallel_for(cfg.mc_reps, resolve_threads(cfg.threads), [&](std::size_t rep) {
        const RngSeed rep_seed = root.child(kReplicate).child(rep);
        const DataMatrix x = design.sample(cfg.n, rep_seed.child(0));
        const auto stats = mean_statistics(x, cfg.p_list);
        for (std::size_t e = 0; e < ne; ++e) {
            const auto draws = engine_draws(cfg.estimators[e], x, design, cfg, rep_seed.child(1 + e));
            for (std::size_t i = 0; i < np; ++i) {
                const double q = empirical_quantile(draws[i], 1.0 - cfg.alpha);
                per_rep[rep].push_back({rep, labels[i], cfg.estimators[e], stats[i], q, stats[i] <= q});
            }
        }
    });

    CoverageResult result;
    for (auto& rows : per_rep) result.records.insert(result.records.end(), rows.begin(), rows.end());
    for (std::size_t e = 0; e < ne; ++e) {
        for (std::size_t i = 0; i < np; ++i) {
            CoverageSummary s{labels[i], cfg.estimators[e], 0, cfg.mc_reps, 0.0, 0.0};
            for (const auto& r : result.records) {
                if (r.p == s.p && r.estimator == s.estimator && r.covered) ++s.covered;
            }
            s.coverage = static_cast<double>(s.covered) / static_cast<double>(s.reps);
            s.mc_se = binomial_se(s.coverage, s.reps);
            result.summaries.push_back(s);
        }
    }
    return result;
}

PowerResult run_power_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.kind != ExperimentKind::PowerDense && cfg.kind != ExperimentKind::PowerSparse) {
        throw ConfigError("power experiment needs kind power-dense or power-sparse");
    }
    const Design design = Design::from_config(cfg);
    const RngSeed root(cfg.seed);
    const auto labels = p_labels(cfg);
    const auto grid = cfg.resolved_delta_grid();
    const std::size_t np = cfg.p_list.size();
    const std::size_t ne = cfg.estimators.size();
    const std::size_t nd = grid.size();
    const auto d = static_cast<Eigen::Index>(cfg.d);

    Eigen::VectorXd direction = Eigen::VectorXd::Zero(d);
    if (cfg.kind == ExperimentKind::PowerDense) {
        direction.setOnes();
    } else {
        direction.head(static_cast<Eigen::Index>(cfg.sparse_support())).setOnes();
    }
    const double root_n = std::sqrt(static_cast<double>(cfg.n));

    // reject[rep][(g * ne + e) * np + i]
    std::vector<std::vector<char>> reject(cfg.mc_reps, std::vector<char>(nd * ne * np, 0));
    parallel_for(cfg.mc_reps, resolve_threads(cfg.threads), [&](std::size_t rep) {
        const RngSeed rep_seed = root.child(kReplicate).child(rep);
        const DataMatrix x = design.sample(cfg.n, rep_seed.child(0));
        const Eigen::VectorXd mean = x.colwise().mean().transpose();

        std::vector<std::vector<double>> critical(ne, std::vector<double>(np));
        for (std::size_t e = 0; e < ne; ++e) {
            const auto draws = engine_draws(cfg.estimators[e], x, design, cfg, rep_seed.child(1 + e));
            for (std::size_t i = 0; i < np; ++i) critical[e][i] = empirical_quantile(draws[i], 1.0 - cfg.alpha);
        }
        for (std::size_t g = 0; g < nd; ++g) {
            const Eigen::VectorXd shifted = root_n * (mean + grid[g] * direction);
            const std::span<const double> view(shifted.data(), static_cast<std::size_t>(shifted.size()));
            for (std::size_t i = 0; i < np; ++i) {
                const double stat = lp_norm(view, cfg.p_list[i]);
                for (std::size_t e = 0; e < ne; ++e) reject[rep][(g * ne + e) * np + i] = stat >= critical[e][i];
            }
        }
    });

    PowerResult result;
    result.delta_grid = grid;
    for (std::size_t g = 0; g < nd; ++g) {
        for (std::size_t e = 0; e < ne; ++e) {
            for (std::size_t i = 0; i < np; ++i) {
                PowerRecord r{g, grid[g], labels[i], cfg.estimators[e], 0, cfg.mc_reps, 0.0, 0.0};
                for (const auto& row : reject) r.rejections += row[(g * ne + e) * np + i] ? 1 : 0;
                r.power = static_cast<double>(r.rejections) / static_cast<double>(r.reps);
                r.mc_se = binomial_se(r.power, r.reps);
                result.records.push_back(std::move(r));
            }
        }
    }
    return result;
}

ProbeResult run_probe_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const RngSeed root = RngSeed(cfg.seed).child(kProbe);

    struct Task {
        std::function<ProbeReport(const RngSeed&)> run;
    };
    std::vector<Task> tasks;
    for (const auto dim : cfg.probe_dims) {
        const CovMatrix identity = CovMatrix::identity(static_cast<Eigen::Index>(dim));
        const std::size_t block = dim % 2 == 0 ? 2 : 1;
        const CovMatrix blocked = build_block_covariance(dim, block, cfg.decay, root.child(0).child(dim));
        for (const auto& p : cfg.p_list) {
            for (const double eps : cfg.probe_eps) {
                for (const CovMatrix* s : {&identity, &blocked}) {
                    tasks.push_back({[s = *s, p, eps, &cfg](const RngSeed& seed) {
                        return levy_concentration(s, p, eps, cfg.probe_n_mc, seed, cfg.probe_C);
                    }});
                }
            }
            for (const double c : cfg.probe_scales) {
                const CovMatrix scaled = CovMatrix::identity(static_cast<Eigen::Index>(dim), c);
                tasks.push_back({[identity, scaled, p, &cfg](const RngSeed& seed) {
                    return comparison_ks(identity, scaled, p, cfg.probe_n_mc, seed, cfg.probe_C);
                }});
            }
        }
    }

    ProbeResult result;
    result.reports.resize(tasks.size());
    parallel_for(tasks.size(), resolve_threads(cfg.threads),
                 [&](std::size_t i) { result.reports[i] = tasks[i].run(root.child(1).child(i)); });
    return result;
}

CsvTable run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::Ks:
            return run_ks_experiment(cfg).table();
        case ExperimentKind::Coverage:
            return run_coverage_experiment(cfg).table();
        case ExperimentKind::PowerDense:
        case ExperimentKind::PowerSparse:
            return run_power_experiment(cfg).table();
        case ExperimentKind::Probe:
            return run_probe_experiment(cfg).table();
    }
    throw std::logic_error("run_experiment: unknown kind");
}

}  // namespace hdboot
