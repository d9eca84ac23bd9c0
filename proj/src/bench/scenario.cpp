#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fdsc/bench.hpp"
#include "fdsc/error.hpp"

namespace fdsc::bench {

namespace {

constexpr const char* kSwitchedLabel = "FDSC";

std::vector<Matrix> bank_gains(const ScenarioConfig& c) {
    std::vector<Matrix> g;
    for (const auto& n : c.bank) g.push_back(c.controller(n).K);
    return g;
}

std::vector<FrequencyBand> bank_bands(const ScenarioConfig& c) {
    std::vector<FrequencyBand> b;
    for (const auto& n : c.bank) b.push_back(c.controller(n).band);
    return b;
}

SimulationOptions sim_options(const ScenarioConfig& c, const SignalSpec& s) {
    SimulationOptions o;
    o.t0 = c.t0;
    o.t1 = natural_horizon(s, c.t1);
    o.h = c.h;
    return o;
}

ControllerResult summarize(const std::string& label, const Trajectory& tr, int entries) {
    ControllerResult r;
    r.label = label;
    const double a = tr.t.front(), b = tr.t.back();
    r.output_energy = output_energy(tr, a, b);
    r.l2_gain_ratio = l2_gain_ratio(tr, a, b);
    if (entries > 0) {
        auto s = switching_stats(tr, entries);
        r.beta = s.beta;
        r.switch_count = s.switch_count;
    }
    r.sliding_warning = tr.sliding_warning;
    return r;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_results_row(std::ostream& out, const ControllerResult& r, std::size_t entries) {
    out << r.label << ',' << fmt(r.output_energy) << ',' << fmt(r.l2_gain_ratio);
    for (std::size_t i = 0; i < entries; ++i) out << ',' << (i < r.beta.size() ? fmt(r.beta[i]) : "");
    out << ',' << r.switch_count << ',' << (r.sliding_warning ? 1 : 0) << '\n';
}

void write_results_header(std::ostream& out, std::size_t entries) {
    out << "label,output_energy,l2_gain_ratio";
    for (std::size_t i = 0; i < entries; ++i) out << ",beta" << i + 1;
    out << ",switch_count,sliding_warning\n";
}

std::ofstream open_out(const std::filesystem::path& p, std::vector<std::string>& files) {
    std::ofstream f(p);
    if (!f) throw Error("io_error", "cannot write " + p.string(), p.string());
    files.push_back(p.string());
    return f;
}

// Closed-loop sigma_max for every controller and the in/out gap of the bank.
void write_frequency_csv(std::ostream& out, const ScenarioConfig& c) {
    const auto grid = log_grid(1e-3, 1e4, 701);
    std::vector<std::vector<SigmaPoint>> curves;
    out << "omega";
    for (const auto& g : c.controllers) {
        out << ",sigma_" << g.name;
        curves.push_back(sigma_max_sweep(close_loop(c.plant, g.K), grid));
    }
    std::vector<GapPoint> gap;
    if (c.bank.size() == 2) {
        gap = gap_function(c.plant, c.controller(c.bank[1]).K, c.controller(c.bank[0]).K, grid);
        out << ",gap_" << c.bank[1] << '_' << c.bank[0];
    }
    out << '\n';
    for (std::size_t k = 0; k < grid.size(); ++k) {
        out << fmt(grid[k]);
        for (const auto& cv : curves) out << ',' << fmt(cv[k].sigma);
        if (!gap.empty()) out << ',' << fmt(gap[k].gap);
        out << '\n';
    }
}

void write_run_plot(std::ostream& out, const ScenarioResult& r) {
    out << "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't [s]'\nset ylabel '|z|'\n";
    out << "plot ";
    for (std::size_t i = 0; i < r.results.size(); ++i) {
        out << (i ? ", " : "") << "'traj_" << r.results[i].label << ".csv' using 1:8 with lines title '" << r.results[i].label
            << "'";
    }
    out << "\nset logscale x\nset xlabel 'omega [rad/s]'\nset ylabel 'sigma_max'\n";
    out << "plot for [i=2:*] 'frequency.csv' using 1:i with lines\n";
}

void write_sweep_plot(std::ostream& out, const ScenarioConfig& c, const std::vector<SweepRow>& rows) {
    // The high-frequency passive loop is orders of magnitude above the others;
    // it is drawn scaled so all curves share one axis.
    const double scale = c.sweep->parameter == "rho_p" ? 5000.0 : 100.0;
    out << "set datafile separator ','\nset xlabel '" << c.sweep->parameter << "'\nset ylabel 'output energy'\n";
    out << "# PassC-HF is plotted divided by " << fmt(scale) << "\n";
    out << "plot ";
    if (!rows.empty()) {
        for (std::size_t i = 0; i < rows.front().results.size(); ++i) {
            const auto& label = rows.front().results[i].label;
            const std::string div = label == "PassC-HF" ? "/" + fmt(scale) : "";
            out << (i ? ", " : "") << "'sweep.csv' using 1:($2 eq '" << label << "' ? $3" << div
                << " : NaN) with linespoints title '" << label << (div.empty() ? "" : " (scaled)") << "'";
        }
    }
    out << '\n';
}

}  // namespace

ControllerBank make_bank(const ScenarioConfig& c, std::optional<SwitchingDesign>* design) {
    c.validate();
    ControllerBank bank;
    bank.dwell_time = c.dwell_time;
    bank.hysteresis = c.hysteresis;
    std::vector<Matrix> q = c.q_values;
    if (c.q_source == QSource::synthesize) {
        auto d = synthesize_q(c.plant, bank_gains(c), bank_bands(c), c.in_band_index, c.gamma_tol);
        if (!d.feasible) throw Error("synthesis_infeasible", d.message, "bank.q_source");
        q = d.Q;
        if (design) *design = std::move(d);
    }
    for (std::size_t i = 0; i < c.bank.size(); ++i) {
        const auto& g = c.controller(c.bank[i]);
        bank.entries.push_back({g.name, g.K, g.band, q[i]});
    }
    bank.validate(c.plant);
    return bank;
}

const ControllerResult& ScenarioResult::find(const std::string& label) const {
    for (const auto& r : results) {
        if (r.label == label) return r;
    }
    throw InvalidArgument("no result labelled '" + label + "'", label);
}

std::vector<ControllerResult> evaluate_point(const ScenarioConfig& config, const ControllerBank& bank,
                                             const SignalSpec& signal) {
    const Disturbance d(signal);
    const auto opts = sim_options(config, signal);
    const Vector x0 = Vector::Zero(config.plant.states());
    std::vector<ControllerResult> out;
    for (const auto& [label, name] : config.passive) {
        out.push_back(summarize(label, simulate_fixed(config.plant, config.controller(name).K, d, x0, opts), 0));
    }
    out.push_back(summarize(kSwitchedLabel, simulate_switched(config.plant, bank, d, x0, opts), static_cast<int>(bank.size())));
    return out;
}

namespace {

SignalSpec sweep_signal(const ScenarioConfig& c, double value) {
    auto d = c.disturbance;
    if (c.sweep->parameter == "rho_p") {
        d.rho_p = value;
    } else {
        d.rho_t = value;
    }
    return make_signal(d);
}

}  // namespace

std::vector<SweepRow> run_sweep_serial(const ScenarioConfig& config, const ControllerBank& bank) {
    if (!config.sweep) throw InvalidArgument("configuration has no sweep", "sweep");
    std::vector<SweepRow> rows;
    for (double v : config.sweep->grid) rows.push_back({v, evaluate_point(config, bank, sweep_signal(config, v))});
    return rows;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& config, const ControllerBank& bank) {
    if (!config.sweep) throw InvalidArgument("configuration has no sweep", "sweep");
    const auto& grid = config.sweep->grid;
    const int n = static_cast<int>(grid.size());
    std::vector<SweepRow> rows(grid.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n; ++k) {
        try {
            const auto i = static_cast<std::size_t>(k);
            rows[i] = {grid[i], evaluate_point(config, bank, sweep_signal(config, grid[i]))};
        } catch (...) {
#pragma omp critical(fdsc_sweep_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return rows;
}

ScenarioResult run_scenario(const ScenarioConfig& config, const std::string& out_dir) {
    config.validate();
    ScenarioResult result;
    const auto bank = make_bank(config, &result.design);
    const std::filesystem::path dir(out_dir);
    if (!out_dir.empty()) std::filesystem::create_directories(dir);
    const std::size_t entries = bank.size();

    if (config.sweep) {
        result.sweep = run_sweep(config, bank);
        result.horizon = natural_horizon(sweep_signal(config, config.sweep->grid.back()), config.t1);
        if (!out_dir.empty()) {
            auto f = open_out(dir / "sweep.csv", result.files);
            f << config.sweep->parameter << ',';
            write_results_header(f, entries);
            for (const auto& row : result.sweep) {
                for (const auto& r : row.results) {
                    f << fmt(row.value) << ',';
                    write_results_row(f, r, entries);
                }
            }
            auto p = open_out(dir / "plot.gp", result.files);
            write_sweep_plot(p, config, result.sweep);
        }
    } else {
        const auto signal = make_signal(config.disturbance);
        const Disturbance d(signal);
        const auto opts = sim_options(config, signal);
        result.horizon = opts.t1;
        const Vector x0 = Vector::Zero(config.plant.states());
        std::vector<std::pair<std::string, Trajectory>> runs;
        for (const auto& [label, name] : config.passive) {
            runs.emplace_back(label, simulate_fixed(config.plant, config.controller(name).K, d, x0, opts));
        }
        runs.emplace_back(kSwitchedLabel, simulate_switched(config.plant, bank, d, x0, opts));
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const bool switched = i + 1 == runs.size();
            result.results.push_back(summarize(runs[i].first, runs[i].second, switched ? static_cast<int>(entries) : 0));
        }
        if (!out_dir.empty()) {
            for (const auto& [label, tr] : runs) {
                auto f = open_out(dir / ("traj_" + label + ".csv"), result.files);
                write_trajectory_csv(f, tr, config.csv_stride);
            }
            {
                auto f = open_out(dir / "switches_FDSC.csv", result.files);
                write_switch_csv(f, runs.back().second);
            }
            {
                auto f = open_out(dir / "summary.csv", result.files);
                write_results_header(f, entries);
                for (const auto& r : result.results) write_results_row(f, r, entries);
            }
            {
                auto f = open_out(dir / "frequency.csv", result.files);
                write_frequency_csv(f, config);
            }
            auto p = open_out(dir / "plot.gp", result.files);
            write_run_plot(p, result);
        }
    }

    if (!out_dir.empty()) {
        {
            auto f = open_out(dir / "config.json", result.files);
            f << config_to_json(config).dump(2) << '\n';
        }
        if (result.design) {
            auto f = open_out(dir / "design.json", result.files);
            f << design_to_json(*result.design, config.bank).dump(2) << '\n';
        }
    }
    return result;
}

std::string export_problem(const ScenarioConfig& config, const std::string& which) {
    config.validate();
    sdp::LmiProblem prob;
    if (which.rfind("gain:", 0) == 0) {
        const auto& g = config.controller(which.substr(5));
        prob = assemble_gkyp_lmi(close_loop(config.plant, g.K), g.band);
    } else if (which == "switching") {
        std::vector<LtiSystem> subs;
        for (const auto& K : bank_gains(config)) subs.push_back(close_loop(config.plant, K));
        std::map<int, double> pinned;
        for (int j = 0; j < static_cast<int>(subs.size()); ++j) {
            if (j != config.in_band_index) pinned[j] = config.gamma_tol;
        }
        prob = assemble_switching_lmi(subs, bank_bands(config), std::nullopt, pinned);
        prob.objective = std::vector<sdp::ObjectiveTerm>{{"mu" + std::to_string(config.in_band_index + 1), CMatrix::Ones(1, 1)}};
    } else {
        throw InvalidArgument("problem must be gain:<controller> or switching", which);
    }
    return sdp::export_sdpa(prob.is_real() ? prob : sdp::embed_hermitian(prob));
}

}  // namespace fdsc::bench
