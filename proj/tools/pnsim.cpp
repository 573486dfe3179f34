// Command-line front end for the Monte Carlo experiments.
//
//   pnsim sweep      --config configs/fig4_cc.json --out fig4.csv
//   pnsim truncation --config configs/table2.json
//   pnsim floors     --config configs/floors.json
//   pnsim bounds     --config configs/bounds.json
//   pnsim tslot      --config configs/tslot_fc.json
//   pnsim validate   --config configs/validate.json

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pnd/pnd.hpp"

namespace {

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> target_errors;
    std::string out;
    unsigned threads = pnd::default_threads();
};

void add_common(CLI::App* cmd, CommonOptions& o, bool config_required = true) {
    auto* c = cmd->add_option("-c,--config", o.config, "JSON manifest")->check(CLI::ExistingFile);
    if (config_required) c->required();
    cmd->add_option("--seed", o.seed, "override the master seed");
    cmd->add_option("--trials", o.trials, "override trials per point");
    cmd->add_option("--target-errors", o.target_errors, "override the early-stop error count (0 disables)");
    cmd->add_option("-o,--out", o.out, "output CSV (default: manifest 'output', else stdout)");
    cmd->add_option("-j,--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
}

pnd::SweepConfig load(const CommonOptions& o) {
    pnd::SweepConfig cfg = o.config.empty() ? pnd::SweepConfig{} : pnd::load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.trials) cfg.trials = *o.trials;
    if (o.target_errors) cfg.target_errors = *o.target_errors;
    if (cfg.target_errors > cfg.trials) cfg.target_errors = cfg.trials;
    if (!o.out.empty()) cfg.output = o.out;
    cfg.validate();
    return cfg;
}

// Writes text to the configured path, or stdout when none is set. Returns the
// path written, empty for stdout.
std::string emit(const pnd::SweepConfig& cfg, const std::string& text) {
    if (cfg.output.empty() || cfg.output == "-") {
        std::cout << text;
        return {};
    }
    pnd::write_text_file(cfg.output, text);
    std::cerr << "wrote " << cfg.output << '\n';
    return cfg.output;
}

void emit_sweep(const pnd::SweepConfig& cfg, const std::vector<pnd::SweepRow>& rows) {
    std::ostringstream csv;
    pnd::write_sweep_csv(csv, rows);
    const std::string path = emit(cfg, csv.str());
    if (!path.empty()) {
        const std::string gp = path + ".gp";
        pnd::write_text_file(gp, pnd::sweep_plot_script(path, rows));
        std::cerr << "wrote " << gp << '\n';
    }
}

void print_truncation_summary(const std::vector<pnd::SweepRow>& rows) {
    std::fprintf(stderr, "%-8s %3s %8s %10s %10s %6s %8s\n", "scenario", "M", "rho_db", "trials", "mean_nu", "max_nu", "flags");
    for (const auto& r : rows) {
        std::fprintf(stderr, "%-8s %3d %8.2f %10llu %10.2f %6d %8llu\n", r.scenario.c_str(), r.antennas, r.rho_db,
                     static_cast<unsigned long long>(r.estimate.trials), r.estimate.mean_terms, r.estimate.max_terms,
                     static_cast<unsigned long long>(r.estimate.flags));
    }
}

int run_validate(const CommonOptions& o) {
    const pnd::SweepConfig cfg = load(o);
    const auto report = pnd::run_oracle_validation(cfg.validation, cfg.seed, o.threads, cfg.truncation);
    std::ostringstream out;
    out << "scenario,instances,passed,worst_error,tolerance\n";
    for (const auto& c : report.cases) {
        out << c.scenario << ',' << c.instances << ',' << c.passed << ',' << pnd::format_number(c.worst_error) << ','
            << pnd::format_number(report.tolerance) << '\n';
    }
    emit(cfg, out.str());
    for (const auto& c : report.cases) {
        std::cerr << c.scenario << ": " << c.passed << "/" << c.instances << " within " << report.tolerance << ", worst "
                  << c.worst_error << '\n';
        if (c.passed != c.instances) std::cerr << "worst instance:\n  " << c.worst_instance << '\n';
    }
    return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase-noise detection experiments"};
    app.require_subcommand(1);

    CommonOptions sweep_o, trunc_o, floors_o, bounds_o, tslot_o, validate_o;
    auto* sweep = app.add_subcommand("sweep", "SER over a scenario / M / rho grid");
    add_common(sweep, sweep_o);
    auto* trunc = app.add_subcommand("truncation", "series terms used per metric");
    add_common(trunc, trunc_o);
    auto* floors = app.add_subcommand("floors", "synchronous SER floors against Monte Carlo");
    add_common(floors, floors_o);
    auto* bounds = app.add_subcommand("bounds", "non-synchronous union bounds against Monte Carlo");
    add_common(bounds, bounds_o);
    auto* tslot = app.add_subcommand("tslot", "decision feedback (NS) against the genie-aided synchronous receiver");
    add_common(tslot, tslot_o);
    auto* validate = app.add_subcommand("validate", "series detectors against the quadrature oracle");
    add_common(validate, validate_o, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) {
            const auto cfg = load(sweep_o);
            emit_sweep(cfg, pnd::run_ser_sweep(cfg, sweep_o.threads));
        } else if (trunc->parsed()) {
            const auto cfg = load(trunc_o);
            const auto rows = pnd::run_truncation_stats(cfg, trunc_o.threads);
            print_truncation_summary(rows);
            emit_sweep(cfg, rows);
        } else if (floors->parsed() || bounds->parsed()) {
            const bool f = floors->parsed();
            const auto cfg = load(f ? floors_o : bounds_o);
            const auto rows = pnd::run_floor_and_bounds(cfg, {f, !f}, f ? floors_o.threads : bounds_o.threads);
            std::ostringstream csv;
            pnd::write_floor_bound_csv(csv, rows);
            emit(cfg, csv.str());
        } else if (tslot->parsed()) {
            const auto cfg = load(tslot_o);
            emit_sweep(cfg, pnd::run_tslot_comparison(cfg, tslot_o.threads));
        } else if (validate->parsed()) {
            return run_validate(validate_o);
        }
    } catch (const std::exception& e) {
        std::cerr << "pnsim: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
