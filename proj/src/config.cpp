#include "hdboot/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "hdboot/covariance.hpp"
#include "hdboot/csv.hpp"
#include "hdboot/sampling.hpp"

namespace hdboot {

namespace {

constexpr std::size_t kMaxDraws = 1'000'000;

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view value) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        const auto comma = std::min(value.find(',', pos), value.size());
        const std::string item = trim(value.substr(pos, comma - pos));
        if (!item.empty()) out.push_back(item);
        pos = comma + 1;
    }
    return out;
}

template <typename T>
T parse_unsigned(std::string_view key, std::string_view value) {
    const std::string v = trim(value);
    T out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError(std::string(key) + ": expected a nonnegative integer, got '" + std::string(value) + "'");
    }
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    try {
        return parse_number(std::string(value));
    } catch (const std::invalid_argument&) {
        throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(value) + "'");
    }
}

bool parse_bool(std::string_view key, std::string_view value) {
    const std::string v = trim(value);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(std::string(key) + ": expected true or false, got '" + v + "'");
}

std::string join_numbers(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_number(values[i]);
    return out;
}

bool is_power(ExperimentKind kind) { return kind == ExperimentKind::PowerDense || kind == ExperimentKind::PowerSparse; }

}  // namespace

ExperimentKind parse_experiment_kind(std::string_view text) {
    if (text == "ks") return ExperimentKind::Ks;
    if (text == "coverage") return ExperimentKind::Coverage;
    if (text == "power-dense") return ExperimentKind::PowerDense;
    if (text == "power-sparse") return ExperimentKind::PowerSparse;
    if (text == "probe") return ExperimentKind::Probe;
    throw ConfigError("unknown experiment kind '" + std::string(text) + "'");
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Ks:
            return "ks";
        case ExperimentKind::Coverage:
            return "coverage";
        case ExperimentKind::PowerDense:
            return "power-dense";
        case ExperimentKind::PowerSparse:
            return "power-sparse";
        case ExperimentKind::Probe:
            return "probe";
    }
    return "unknown";
}

void ExperimentConfig::set(std::string_view key, std::string_view raw) {
    const std::string value = trim(raw);
    try {
        if (key == "kind") {
            kind = parse_experiment_kind(value);
        } else if (key == "preset") {
            apply_preset(*this, value);
        } else if (key == "n") {
            n = parse_unsigned<std::size_t>(key, value);
        } else if (key == "d") {
            d = parse_unsigned<std::size_t>(key, value);
        } else if (key == "marginal") {
            marginal = parse_marginal(value);
        } else if (key == "p_list") {
            p_list.clear();
            for (const auto& item : split_list(value)) p_list.push_back(LpExponent::parse(item));
        } else if (key == "estimators") {
            estimators = split_list(value);
        } else if (key == "mc_reps") {
            mc_reps = parse_unsigned<std::size_t>(key, value);
        } else if (key == "B") {
            B = parse_unsigned<std::size_t>(key, value);
        } else if (key == "truth_reps") {
            truth_reps = parse_unsigned<std::size_t>(key, value);
        } else if (key == "alpha") {
            alpha = parse_real(key, value);
        } else if (key == "delta_grid") {
            delta_grid.clear();
            for (const auto& item : split_list(value)) delta_grid.push_back(parse_real(key, item));
        } else if (key == "delta_points") {
            delta_points = parse_unsigned<std::size_t>(key, value);
        } else if (key == "delta_scale") {
            delta_scale = parse_real(key, value);
        } else if (key == "seed") {
            seed = parse_unsigned<std::uint64_t>(key, value);
        } else if (key == "output_path" || key == "output") {
            output_path = value;
        } else if (key == "block") {
            block = parse_unsigned<std::size_t>(key, value);
        } else if (key == "decay") {
            decay = parse_real(key, value);
        } else if (key == "standardize") {
            standardize = parse_bool(key, value);
        } else if (key == "cv_folds") {
            cv_folds = parse_unsigned<std::size_t>(key, value);
        } else if (key == "cv_grid_points") {
            cv_grid_points = parse_unsigned<std::size_t>(key, value);
        } else if (key == "gmb_via_covariance") {
            gmb_via_covariance = parse_bool(key, value);
        } else if (key == "threads") {
            threads = parse_unsigned<std::size_t>(key, value);
        } else if (key == "probe_dims") {
            probe_dims.clear();
            for (const auto& item : split_list(value)) probe_dims.push_back(parse_unsigned<std::size_t>(key, item));
        } else if (key == "probe_eps") {
            probe_eps.clear();
            for (const auto& item : split_list(value)) probe_eps.push_back(parse_real(key, item));
        } else if (key == "probe_scales") {
            probe_scales.clear();
            for (const auto& item : split_list(value)) probe_scales.push_back(parse_real(key, item));
        } else if (key == "probe_n_mc") {
            probe_n_mc = parse_unsigned<std::size_t>(key, value);
        } else if (key == "probe_C") {
            probe_C = parse_real(key, value);
        } else {
            throw ConfigError("unknown config key '" + std::string(key) + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
    }
}

void ExperimentConfig::validate() const {
    if (n < 2) throw ConfigError("n must be at least 2");
    if (d < 1) throw ConfigError("d must be positive");
    if (p_list.empty()) throw ConfigError("p_list must not be empty");
    for (const auto& p : p_list) {
        if (p.kind() == LpExponent::Kind::LogDim && d < 3) throw ConfigError("p = logd requires d >= 3");
    }
    if (kind != ExperimentKind::Probe) {
        if (estimators.empty()) throw ConfigError("estimators must not be empty");
        for (const auto& e : estimators) {
            if (e == "proxy" || e == "gmb") continue;
            try {
                const auto spec = EstimatorSpec::parse(e);
                if (spec.kind == EstimatorSpec::Kind::CorrelationThresholdCv && n < 6) {
                    throw ConfigError("the cv estimator needs n >= 6");
                }
            } catch (const std::invalid_argument& err) {
                throw ConfigError(err.what());
            }
        }
    }
    if (mc_reps < 1 || truth_reps < 1) throw ConfigError("mc_reps and truth_reps must be positive");
    if (B < 1 || B > kMaxDraws) throw ConfigError("B must lie in [1, 1000000]");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(decay > 0.0 && decay < 1.0)) throw ConfigError("decay must lie in (0, 1)");
    if (block_size() == 0 || d % block_size() != 0) throw ConfigError("block size must divide d");
    if (cv_folds < 1 || cv_grid_points < 1) throw ConfigError("cv_folds and cv_grid_points must be positive");
    if (is_power(kind)) {
        if (delta_grid.empty() && delta_points < 1) throw ConfigError("delta grid must not be empty");
        for (const double v : delta_grid) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("delta_grid values must be nonnegative");
        }
        if (delta_scale < 0.0) throw ConfigError("delta_scale must be nonnegative");
        if (kind == ExperimentKind::PowerSparse && d < 3) throw ConfigError("sparse alternatives need d >= 3");
    }
    if (kind == ExperimentKind::Probe) {
        if (probe_n_mc < 1000) throw ConfigError("probe_n_mc must be at least 1000");
        if (probe_dims.empty() || probe_eps.empty()) throw ConfigError("probe_dims and probe_eps must not be empty");
        for (const double e : probe_eps) {
            if (!(e > 0.0)) throw ConfigError("probe_eps values must be positive");
        }
        for (const double c : probe_scales) {
            if (!(c > 0.0)) throw ConfigError("probe_scales values must be positive");
        }
        for (const auto dim : probe_dims) {
            if (dim < 3) throw ConfigError("probe_dims values must be at least 3");
        }
    }
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream out;
    out << "kind=" << to_string(kind) << '\n'
        << "n=" << n << '\n'
        << "d=" << d << '\n'
        << "marginal=" << to_string(marginal) << '\n';
    out << "p_list=";
    for (std::size_t i = 0; i < p_list.size(); ++i) out << (i ? "," : "") << p_list[i].to_string();
    out << "\nestimators=";
    for (std::size_t i = 0; i < estimators.size(); ++i) out << (i ? "," : "") << estimators[i];
    out << "\nmc_reps=" << mc_reps << "\nB=" << B << "\ntruth_reps=" << truth_reps << "\nalpha=" << format_number(alpha)
        << "\ndelta_grid=" << join_numbers(delta_grid) << "\ndelta_points=" << delta_points
        << "\ndelta_scale=" << format_number(delta_scale) << "\nseed=" << seed << "\noutput_path=" << output_path
        << "\nblock=" << block << "\ndecay=" << format_number(decay) << "\nstandardize=" << (standardize ? "true" : "false")
        << "\ncv_folds=" << cv_folds << "\ncv_grid_points=" << cv_grid_points
        << "\ngmb_via_covariance=" << (gmb_via_covariance ? "true" : "false") << "\nthreads=" << threads;
    out << "\nprobe_dims=";
    for (std::size_t i = 0; i < probe_dims.size(); ++i) out << (i ? "," : "") << probe_dims[i];
    out << "\nprobe_eps=" << join_numbers(probe_eps) << "\nprobe_scales=" << join_numbers(probe_scales)
        << "\nprobe_n_mc=" << probe_n_mc << "\nprobe_C=" << format_number(probe_C) << '\n';
    return out.str();
}

std::size_t ExperimentConfig::block_size() const { return block != 0 ? block : default_block_size(d); }

std::vector<double> ExperimentConfig::resolved_delta_grid() const {
    if (!delta_grid.empty()) return delta_grid;
    const double nd = static_cast<double>(n);
    const double dd = static_cast<double>(d);
    double top = 0.0;
    if (kind == ExperimentKind::PowerSparse) {
        top = (delta_scale > 0.0 ? delta_scale : 1.5) * std::sqrt(std::log(dd) / nd);
    } else {
        top = (delta_scale > 0.0 ? delta_scale : 6.0) / std::sqrt(nd * dd);
    }
    std::vector<double> grid(delta_points, 0.0);
    for (std::size_t i = 1; i < delta_points; ++i) {
        grid[i] = top * static_cast<double>(i) / static_cast<double>(delta_points - 1);
    }
    return grid;
}

std::size_t ExperimentConfig::sparse_support() const {
    const double half = std::sqrt(std::log(static_cast<double>(d))) / 2.0;
    return std::min(d, 2 * static_cast<std::size_t>(std::ceil(half)));
}

ExperimentConfig defaults_for(ExperimentKind kind) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    if (is_power(kind)) cfg.estimators = {"cv"};
    if (kind == ExperimentKind::Probe) {
        cfg.p_list = {LpExponent::finite(1.0), LpExponent::finite(2.0), LpExponent::finite(4.0), LpExponent::log_dim(),
                      LpExponent::infinity()};
    }
    return cfg;
}

void apply_preset(ExperimentConfig& cfg, std::string_view name) {
    if (name == "desk") {
        const auto kind = cfg.kind;
        cfg = defaults_for(kind);
    } else if (name == "paper-scale") {
        cfg.n = 200;
        cfg.d = (cfg.kind == ExperimentKind::PowerDense || cfg.kind == ExperimentKind::PowerSparse) ? 400 : 1000;
        cfg.mc_reps = 1000;
        cfg.B = 1000;
        cfg.truth_reps = 5000;
        cfg.block = 0;
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "' (expected desk or paper-scale)");
    }
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        try {
            base.set(key, std::string_view(body).substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, std::move(base));
}

}  // namespace hdboot
