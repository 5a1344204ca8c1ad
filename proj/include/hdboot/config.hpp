#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hdboot/distributions.hpp"
#include "hdboot/lp_norm.hpp"

namespace hdboot {

/// Invalid configuration text or values (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { Ks, Coverage, PowerDense, PowerSparse, Probe };

ExperimentKind parse_experiment_kind(std::string_view text);
std::string to_string(ExperimentKind kind);

/// Settings of one simulation run. Defaults are the desk-scale values.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Ks;
    std::size_t n = 200;
    std::size_t d = 200;
    MarginalKind marginal = MarginalKind::UniformSym;
    std::vector<LpExponent> p_list{LpExponent::finite(1.0), LpExponent::finite(2.0), LpExponent::log_dim(),
                                   LpExponent::infinity()};
    /// Engines: proxy, gmb, naive, cv, hard:<lambda>, band:<l>.
    std::vector<std::string> estimators{"proxy", "gmb", "naive", "cv"};
    std::size_t mc_reps = 500;
    std::size_t B = 500;
    std::size_t truth_reps = 2000;
    double alpha = 0.05;
    /// Explicit power grid; empty means delta_points values spanning [0, delta_scale * unit].
    std::vector<double> delta_grid;
    std::size_t delta_points = 13;
    double delta_scale = 0.0;  ///< 0 selects 6 (dense) or 1.5 (sparse)
    std::uint64_t seed = 20200501;
    std::string output_path;   ///< empty writes to stdout
    std::size_t block = 0;     ///< 0 selects default_block_size(d)
    double decay = 0.8;
    bool standardize = true;
    std::size_t cv_folds = 10;
    std::size_t cv_grid_points = 40;
    bool gmb_via_covariance = false;
    std::size_t threads = 0;   ///< 0 defers to HDBOOT_THREADS or the hardware
    // Probe settings.
    std::vector<std::size_t> probe_dims{50, 200};
    std::vector<double> probe_eps{0.05, 0.1};
    std::vector<double> probe_scales{1.0, 1.1, 1.5, 2.0};
    std::size_t probe_n_mc = 20000;
    double probe_C = 10.0;

    /// Sets one key; keys match the field names ("output" is an alias of
    /// output_path, "preset" loads a named preset). @throws ConfigError.
    void set(std::string_view key, std::string_view value);
    /// @throws ConfigError when fields are inconsistent.
    void validate() const;
    /// Key=value text that parses back to the same configuration.
    [[nodiscard]] std::string to_text() const;

    /// Block size actually used.
    [[nodiscard]] std::size_t block_size() const;
    /// Power grid actually used.
    [[nodiscard]] std::vector<double> resolved_delta_grid() const;
    /// Number of nonzero coordinates of the sparse alternative: 2 ceil(sqrt(log d) / 2).
    [[nodiscard]] std::size_t sparse_support() const;
};

/// Defaults for one experiment kind: power runs use the "cv" engine only and
/// probes add p = 4 to the exponent list.
ExperimentConfig defaults_for(ExperimentKind kind);

/// Named presets: "desk" (the defaults) and "paper-scale" (d = 1000, 1000
/// replicates and bootstrap draws, 5000 truth draws; d = 400 when cfg.kind is a power kind).
void apply_preset(ExperimentConfig& cfg, std::string_view name);

/// Flat key=value text; '#' starts a comment; blank lines are ignored.
/// @throws ConfigError on syntax errors or unknown keys.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

}  // namespace hdboot
