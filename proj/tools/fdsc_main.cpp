#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdsc/bench.hpp"
#include "fdsc/error.hpp"

using namespace fdsc;
using nlohmann::json;

namespace {

bench::ScenarioConfig load_config(const std::string& preset_name, const std::string& config_path) {
    if (config_path.empty()) return bench::preset(preset_name.empty() ? "low" : preset_name);
    std::ifstream in(config_path);
    if (!in) throw Error("io_error", "cannot read " + config_path, config_path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what(), config_path);
    }
    return bench::config_from_json(j);
}

json results_json(const std::vector<bench::ControllerResult>& rs) {
    json a = json::array();
    for (const auto& r : rs) {
        a.push_back({{"label", r.label},
                     {"output_energy", r.output_energy},
                     {"l2_gain_ratio", r.l2_gain_ratio},
                     {"beta", r.beta},
                     {"switch_count", r.switch_count},
                     {"sliding_warning", r.sliding_warning}});
    }
    return a;
}

json matrix_json(const Matrix& M) {
    json a = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        a.push_back(r);
    }
    return a;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error("io_error", "cannot write " + path, path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frequency-dependent switching control: gain analysis, Q synthesis, simulation and benchmarks"};
    app.require_subcommand(1);

    std::string preset_name, config_path, out_path, q_source, controller, problem, in_k, out_k;
    double gamma_tol = -1.0;
    int in_band = -1;

    auto* bench_cmd = app.add_subcommand("bench", "Aircraft benchmark presets");
    bench_cmd->require_subcommand(1);
    auto* list_cmd = bench_cmd->add_subcommand("list", "List presets");
    auto* show_cmd = bench_cmd->add_subcommand("config", "Print a preset as JSON config");
    show_cmd->add_option("preset", preset_name)->required();
    auto* run_cmd = bench_cmd->add_subcommand("run", "Run a preset or a JSON config");
    run_cmd->add_option("preset", preset_name, "Preset name");
    run_cmd->add_option("--config", config_path, "JSON config (overrides the preset)");
    run_cmd->add_option("--out", out_path, "Output directory")->required();
    run_cmd->add_option("--q-source", q_source, "published or synthesize")
        ->check(CLI::IsMember({"published", "synthesize"}));

    auto* analyze_cmd = app.add_subcommand("analyze", "Frequency-domain analysis");
    analyze_cmd->require_subcommand(1);
    auto* gain_cmd = analyze_cmd->add_subcommand("gain", "Finite-frequency gain bound of one controller");
    gain_cmd->add_option("--controller", controller)->required();
    gain_cmd->add_option("--config", config_path);
    auto* gap_cmd = analyze_cmd->add_subcommand("gap", "sigma_max gap between two controllers on a grid");
    gap_cmd->add_option("--in", in_k)->required();
    gap_cmd->add_option("--out", out_k)->required();
    gap_cmd->add_option("--config", config_path);
    gap_cmd->add_option("--csv", out_path, "Output CSV (default stdout)");

    auto* synth_cmd = app.add_subcommand("synthesize", "Switching design");
    synth_cmd->require_subcommand(1);
    auto* q_cmd = synth_cmd->add_subcommand("q", "Synthesize Q weights for the bank");
    q_cmd->add_option("--config", config_path);
    q_cmd->add_option("--gamma-tol", gamma_tol);
    q_cmd->add_option("--in-band", in_band, "0-based bank index of the in-band controller");

    auto* sim_cmd = app.add_subcommand("simulate", "Simulate one controller or the switched bank");
    sim_cmd->add_option("--preset", preset_name, "Preset supplying plant and disturbance");
    sim_cmd->add_option("--config", config_path);
    sim_cmd->add_option("--controller", controller, "Controller name or FDSC")->required();
    sim_cmd->add_option("--out", out_path, "Trajectory CSV (default stdout)");
    int stride = 0;
    sim_cmd->add_option("--stride", stride, "CSV row stride (default from config)");

    auto* export_cmd = app.add_subcommand("export", "Export an LMI problem");
    export_cmd->require_subcommand(1);
    auto* export_sdpa_cmd = export_cmd->add_subcommand("sdpa", "SDPA sparse format");
    export_sdpa_cmd->add_option("--problem", problem, "gain:<controller> or switching")->required();
    export_sdpa_cmd->add_option("--config", config_path);
    export_sdpa_cmd->add_option("--out", out_path, "Output file (default stdout)");

    auto* import_cmd = app.add_subcommand("import", "Read an exported problem back");
    import_cmd->require_subcommand(1);
    std::string in_path;
    auto* import_sdpa_cmd = import_cmd->add_subcommand("sdpa", "Parse and summarize an SDPA file");
    import_sdpa_cmd->add_option("file", in_path)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list_cmd) {
            for (const auto& p : bench::preset_list()) std::cout << p.name << '\t' << p.description << '\n';
        } else if (*show_cmd) {
            std::cout << bench::config_to_json(bench::preset(preset_name)).dump(2) << '\n';
        } else if (*run_cmd) {
            auto cfg = load_config(preset_name, config_path);
            if (!q_source.empty()) cfg.q_source = q_source == "synthesize" ? bench::QSource::synthesize : bench::QSource::published;
            const auto r = bench::run_scenario(cfg, out_path);
            json j{{"scenario", cfg.name}, {"horizon", r.horizon}, {"files", r.files}};
            if (cfg.sweep) {
                json rows = json::array();
                for (const auto& row : r.sweep) rows.push_back({{cfg.sweep->parameter, row.value}, {"results", results_json(row.results)}});
                j["sweep"] = rows;
            } else {
                j["results"] = results_json(r.results);
            }
            std::cout << j.dump(2) << '\n';
        } else if (*gain_cmd) {
            const auto cfg = load_config("", config_path);
            const auto& g = cfg.controller(controller);
            const auto b = finite_frequency_gain(close_loop(cfg.plant, g.K), g.band);
            json j{{"controller", g.name}, {"band", describe(g.band)}, {"bounded", b.bounded},
                   {"status", sdp::to_string(b.status)}, {"grid_peak", b.grid_peak}, {"message", b.message}};
            if (b.bounded) {
                j["gamma"] = b.gamma;
                j["Q"] = matrix_json(b.Q);
            }
            std::cout << j.dump(2) << '\n';
        } else if (*gap_cmd) {
            const auto cfg = load_config("", config_path);
            const auto pts = gap_function(cfg.plant, cfg.controller(in_k).K, cfg.controller(out_k).K, log_grid(1e-3, 1e4, 701));
            std::ostringstream os;
            os << "omega,gap\n";
            char buf[64];
            for (const auto& p : pts) {
                std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", p.omega, p.gap);
                os << buf;
            }
            write_text(out_path, os.str());
        } else if (*q_cmd) {
            auto cfg = load_config("", config_path);
            if (gamma_tol > 0.0) cfg.gamma_tol = gamma_tol;
            if (in_band >= 0) cfg.in_band_index = in_band;
            cfg.validate();
            std::vector<Matrix> gains;
            std::vector<FrequencyBand> bands;
            for (const auto& n : cfg.bank) {
                gains.push_back(cfg.controller(n).K);
                bands.push_back(cfg.controller(n).band);
            }
            const auto d = synthesize_q(cfg.plant, gains, bands, cfg.in_band_index, cfg.gamma_tol);
            std::cout << bench::design_to_json(d, cfg.bank).dump(2) << '\n';
            if (!d.feasible) return 3;
        } else if (*sim_cmd) {
            auto cfg = load_config(preset_name, config_path);
            const auto signal = bench::make_signal(cfg.disturbance);
            SimulationOptions opts;
            opts.t0 = cfg.t0;
            opts.t1 = natural_horizon(signal, cfg.t1);
            opts.h = cfg.h;
            const Vector x0 = Vector::Zero(cfg.plant.states());
            const Disturbance d(signal);
            const auto tr = controller == "FDSC" ? simulate_switched(cfg.plant, bench::make_bank(cfg), d, x0, opts)
                                                 : simulate_fixed(cfg.plant, cfg.controller(controller).K, d, x0, opts);
            std::ostringstream os;
            write_trajectory_csv(os, tr, stride > 0 ? stride : cfg.csv_stride);
            write_text(out_path, os.str());
            for (const auto& w : tr.warnings) std::cerr << w << '\n';
        } else if (*export_sdpa_cmd) {
            write_text(out_path, bench::export_problem(load_config("", config_path), problem));
        } else if (*import_sdpa_cmd) {
            std::ifstream in(in_path);
            std::stringstream ss;
            ss << in.rdbuf();
            const auto data = sdp::read_sdpa(ss.str());
            const bool stable = sdp::read_sdpa(sdp::write_sdpa(data)) == data;
            std::cout << json{{"m", data.m}, {"blocks", data.block_sizes}, {"entries", data.entries.size()}, {"round_trip", stable}}.dump(2)
                      << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << bench::error_record(e).dump() << '\n';
        return 2;
    }
    return 0;
}
