#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fdsc/gkyp.hpp"
#include "fdsc/metrics.hpp"
#include "fdsc/model.hpp"
#include "fdsc/runtime.hpp"

namespace fdsc::bench {

struct NamedGain {
    std::string name;
    Matrix K;
    FrequencyBand band;
};

enum class QSource { published, synthesize };

std::string to_string(QSource q);

// Disturbance as written in a config: a named preset with its parameters, or
// an explicit signal tree.
struct DisturbanceConfig {
    std::string preset;  // "low", "high", "mixed", "inserted" or "" for explicit
    double rho_p = 0.0;
    double rho_star = 0.1;
    double T = 500.0;
    double rho_t = 0.0;
    SignalSpec explicit_spec;
};

SignalSpec make_signal(const DisturbanceConfig& d);

struct SweepConfig {
    std::string parameter;  // "rho_p" or "rho_t"
    std::vector<double> grid;
};

struct ScenarioConfig {
    int schema_version = 1;
    std::string name;
    StateSpacePlant plant;
    std::vector<NamedGain> controllers;

    // Switching bank: controller names with their Q weights.
    std::vector<std::string> bank;
    std::vector<Matrix> q_values;
    QSource q_source = QSource::published;
    double gamma_tol = 0.7125;
    int in_band_index = 1;
    double dwell_time = 0.0;
    double hysteresis = 0.0;

    // Fixed-gain comparisons as (label, controller name).
    std::vector<std::pair<std::string, std::string>> passive;

    DisturbanceConfig disturbance;
    double t0 = 0.0;
    double t1 = 500.0;  // piecewise disturbances use their schedule end instead
    double h = 1e-3;
    int csv_stride = 100;
    std::optional<SweepConfig> sweep;

    const NamedGain& controller(const std::string& name) const;
    // Resolves names, checks shapes, sweep ranges and the time grid.
    void validate() const;
};

// Aircraft plant, the four gains with their bands, the published Q weights
// and the low-frequency scenario.
ScenarioConfig builtin_benchmark();

struct PresetInfo {
    std::string name;
    std::string description;
};
std::vector<PresetInfo> preset_list();
ScenarioConfig preset(const std::string& name);

ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& c);

nlohmann::json design_to_json(const SwitchingDesign& d, const std::vector<std::string>& names);

// Builds the switching bank; synthesizes Q first when requested.
ControllerBank make_bank(const ScenarioConfig& c, std::optional<SwitchingDesign>* design = nullptr);

struct ControllerResult {
    std::string label;
    double output_energy = 0.0;
    double l2_gain_ratio = 0.0;
    std::vector<double> beta;
    int switch_count = 0;
    bool sliding_warning = false;
};

struct SweepRow {
    double value = 0.0;
    std::vector<ControllerResult> results;  // one per controller, FDSC last
};

struct ScenarioResult {
    std::vector<ControllerResult> results;  // PassC-* in config order, then FDSC
    std::vector<SweepRow> sweep;
    std::optional<SwitchingDesign> design;
    std::vector<std::string> files;
    double horizon = 0.0;

    const ControllerResult& find(const std::string& label) const;
};

// One simulation per passive controller and one for the bank, then metrics.
// With a sweep, every grid point is evaluated (OpenMP over points) and only
// ScenarioResult::sweep is filled. Writes CSVs, config.json, design.json (when
// synthesized) and a gnuplot script when out_dir is non-empty.
ScenarioResult run_scenario(const ScenarioConfig& config, const std::string& out_dir = {});

// Sweep evaluation only; the serial variant is the reference for the
// parallel one and gives identical numbers.
std::vector<SweepRow> run_sweep(const ScenarioConfig& config, const ControllerBank& bank);
std::vector<SweepRow> run_sweep_serial(const ScenarioConfig& config, const ControllerBank& bank);

// Evaluates one configuration point (all controllers) with an explicit signal.
std::vector<ControllerResult> evaluate_point(const ScenarioConfig& config, const ControllerBank& bank,
                                             const SignalSpec& signal);

// "gain:<controller>" or "switching"; MF problems are exported after embedding.
std::string export_problem(const ScenarioConfig& config, const std::string& which);

// {"error": kind, "message": ..., "key": ...}
nlohmann::json error_record(const std::exception& e);

}  // namespace fdsc::bench
