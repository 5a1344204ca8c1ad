#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hdboot/config.hpp"
#include "hdboot/csv.hpp"
#include "hdboot/harness.hpp"
#include "hdboot/inference.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> threads;
};

struct TestOptions {
    std::string data;
    bool header = false;
    std::string m_file;
    std::string m0_file;
    std::string p = "2";
    double alpha = 0.05;
    std::string estimator = "naive";
    std::size_t B = 1000;
};

struct VolumeOptions {
    std::size_t d = 0;
    std::string p;
    double r = 1.0;
    bool log = false;
};

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    fn(out);
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

hdboot::ExperimentConfig experiment_config(hdboot::ExperimentKind kind, const GlobalOptions& global) {
    if (global.config.empty()) throw hdboot::ConfigError("this subcommand requires --config <file>");
    auto cfg = hdboot::load_config(global.config, hdboot::defaults_for(kind));
    const bool power = kind == hdboot::ExperimentKind::PowerDense || kind == hdboot::ExperimentKind::PowerSparse;
    const bool cfg_power =
        cfg.kind == hdboot::ExperimentKind::PowerDense || cfg.kind == hdboot::ExperimentKind::PowerSparse;
    if (power ? !cfg_power : cfg.kind != kind) {
        throw hdboot::ConfigError("config kind '" + hdboot::to_string(cfg.kind) + "' does not match the subcommand");
    }
    if (global.seed) cfg.seed = *global.seed;
    if (global.threads) cfg.threads = *global.threads;
    if (!global.out.empty()) cfg.output_path = global.out;
    cfg.validate();
    return cfg;
}

void run_experiment_command(hdboot::ExperimentKind kind, const GlobalOptions& global) {
    const auto cfg = experiment_config(kind, global);
    const auto table = hdboot::run_experiment(cfg);
    with_output(cfg.output_path, [&](std::ostream& out) { table.write(out); });
}

void run_test_command(const TestOptions& opt, const GlobalOptions& global) {
    const Eigen::MatrixXd x = hdboot::read_matrix_csv_file(opt.data, opt.header);
    hdboot::TestSpec spec = hdboot::TestSpec::identity(x.cols());
    if (!opt.m_file.empty()) spec.M = hdboot::read_matrix_csv_file(opt.m_file);
    if (!opt.m0_file.empty()) {
        const Eigen::MatrixXd m0 = hdboot::read_matrix_csv_file(opt.m0_file);
        if (m0.cols() != 1 && m0.rows() != 1) throw hdboot::ConfigError("--m0-file must hold a single row or column");
        spec.m0 = m0.reshaped();
    } else if (!opt.m_file.empty()) {
        spec.m0 = Eigen::VectorXd::Zero(spec.M.rows());
    }
    try {
        spec.p = hdboot::LpExponent::parse(opt.p);
        spec.estimator = hdboot::EstimatorSpec::parse(opt.estimator);
        spec.alpha = opt.alpha;
        spec.B = opt.B;
        spec.seed = hdboot::RngSeed(global.seed.value_or(0));
        spec.validate(x.cols());
    } catch (const std::invalid_argument& e) {
        throw hdboot::ConfigError(e.what());
    }
    const auto result = hdboot::run_test(x, spec);
    with_output(global.out, [&](std::ostream& out) {
        out << hdboot::TestResult::csv_header() << '\n' << result.csv_row() << '\n';
    });
}

void run_volume_command(const VolumeOptions& opt, const GlobalOptions& global) {
    double p = 0.0;
    try {
        const auto exponent = hdboot::LpExponent::parse(opt.p);
        if (exponent.kind() == hdboot::LpExponent::Kind::LogDim && opt.d < 3) {
            throw std::invalid_argument("p = logd requires d >= 3");
        }
        p = exponent.resolve(opt.d);
        if (opt.d == 0 || !(opt.r > 0.0)) throw std::invalid_argument("--d and --r must be positive");
    } catch (const std::invalid_argument& e) {
        throw hdboot::ConfigError(e.what());
    }
    const auto volume = hdboot::lp_ball_volume(opt.d, p, opt.r);
    with_output(global.out, [&](std::ostream& out) {
        if (opt.log) {
            out << hdboot::format_number(volume.log_volume) << '\n';
        } else if (volume.volume) {
            out << hdboot::format_number(*volume.volume) << '\n';
        } else {
            out << "out of range; log_volume=" << hdboot::format_number(volume.log_volume) << '\n';
        }
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bootstrap inference with lp-statistics for high-dimensional means", "hdboot"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions global;
    app.add_option("--config", global.config, "Experiment config file (key=value lines)");
    app.add_option("--seed", global.seed, "Master seed (overrides the config)");
    app.add_option("--out", global.out, "Output CSV path (default: stdout)");
    app.add_option("--threads", global.threads, "Worker threads (default: HDBOOT_THREADS or all cores)")
        ->check(CLI::PositiveNumber);

    auto* ks = app.add_subcommand("ks", "KS distances between bootstrap laws and the simulated truth");
    auto* coverage = app.add_subcommand("coverage", "Coverage of simultaneous confidence sets");
    auto* power = app.add_subcommand("power", "Power under dense or sparse alternatives (kind in the config)");
    auto* probe = app.add_subcommand("probe", "Anti-concentration and Gaussian comparison probes");

    TestOptions test_opt;
    auto* test = app.add_subcommand("test", "Test H0: M mu = m0 on a CSV data file");
    test->add_option("--data", test_opt.data, "Observations, one row each")->required();
    test->add_flag("--header", test_opt.header, "Skip one header line in the data file");
    test->add_option("--M-file", test_opt.m_file, "Restriction matrix M (default: identity)");
    test->add_option("--m0-file", test_opt.m0_file, "Right-hand side m0 (default: zero)");
    test->add_option("--p", test_opt.p, "Exponent: number, logd or inf")->capture_default_str();
    test->add_option("--alpha", test_opt.alpha, "Level")->capture_default_str();
    test->add_option("--estimator", test_opt.estimator, "naive, cv, hard:<lambda> or band:<l>")->capture_default_str();
    test->add_option("--B", test_opt.B, "Bootstrap draws")->capture_default_str();

    VolumeOptions vol_opt;
    auto* volume = app.add_subcommand("volume", "Volume of the lp ball of radius r in d dimensions");
    volume->add_option("--d", vol_opt.d, "Dimension")->required();
    volume->add_option("--p", vol_opt.p, "Exponent: number, logd or inf")->required();
    volume->add_option("--r", vol_opt.r, "Radius")->capture_default_str();
    volume->add_flag("--log", vol_opt.log, "Print the natural log of the volume");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (ks->parsed()) run_experiment_command(hdboot::ExperimentKind::Ks, global);
        if (coverage->parsed()) run_experiment_command(hdboot::ExperimentKind::Coverage, global);
        if (power->parsed()) run_experiment_command(hdboot::ExperimentKind::PowerDense, global);
        if (probe->parsed()) run_experiment_command(hdboot::ExperimentKind::Probe, global);
        if (test->parsed()) run_test_command(test_opt, global);
        if (volume->parsed()) run_volume_command(vol_opt, global);
    } catch (const hdboot::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
