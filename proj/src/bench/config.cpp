#include <cmath>
#include <set>

#include "fdsc/bench.hpp"
#include "fdsc/error.hpp"

namespace fdsc::bench {

using nlohmann::json;

std::string to_string(QSource q) { return q == QSource::published ? "published" : "synthesize"; }

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
    Matrix M(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : r) {
        Eigen::Index j = 0;
        for (double v : row) M(i, j++) = v;
        ++i;
    }
    return M;
}

QSource q_source_from_string(const std::string& s) {
    if (s == "published") return QSource::published;
    if (s == "synthesize") return QSource::synthesize;
    throw ConfigError("q_source must be published or synthesize, got '" + s + "'", "bank.q_source");
}

}  // namespace

SignalSpec make_signal(const DisturbanceConfig& d) {
    if (d.preset.empty()) return d.explicit_spec;
    if (d.preset == "low") return preset_low();
    if (d.preset == "high") return preset_high();
    if (d.preset == "mixed") return preset_mixed(d.rho_p);
    if (d.preset == "inserted") return preset_inserted(d.rho_star, d.T, d.rho_t);
    throw ConfigError("unknown disturbance preset '" + d.preset + "'", "disturbance.preset");
}

const NamedGain& ScenarioConfig::controller(const std::string& name) const {
    for (const auto& c : controllers) {
        if (c.name == name) return c;
    }
    throw ConfigError("unknown controller '" + name + "'", name);
}

void ScenarioConfig::validate() const {
    if (schema_version != 1) throw ConfigError("unsupported schema_version " + std::to_string(schema_version), "schema_version");
    try {
        plant.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("plant: ") + e.what(), "plant");
    }
    std::set<std::string> names;
    for (const auto& c : controllers) {
        if (!names.insert(c.name).second) throw ConfigError("duplicate controller '" + c.name + "'", c.name);
        if (c.K.rows() != plant.inputs() || c.K.cols() != plant.states()) {
            throw ConfigError("gain '" + c.name + "' has the wrong shape", c.name);
        }
    }
    if (bank.empty()) throw ConfigError("bank lists no controllers", "bank.controllers");
    for (const auto& b : bank) controller(b);
    for (const auto& [label, name] : passive) controller(name);
    if (q_source == QSource::published) {
        if (q_values.size() != bank.size()) throw ConfigError("one Q per bank controller is required", "bank.Q");
        for (const auto& Q : q_values) {
            if (Q.rows() != plant.states() || Q.cols() != plant.states()) throw ConfigError("Q has the wrong shape", "bank.Q");
        }
    }
    if (in_band_index < 0 || in_band_index >= static_cast<int>(bank.size())) {
        throw ConfigError("in_band_index outside the bank", "bank.in_band_index");
    }
    if (!(gamma_tol > 0.0)) throw ConfigError("gamma_tol must be positive", "bank.gamma_tol");
    if (!(dwell_time >= 0.0)) throw ConfigError("dwell_time must be >= 0", "bank.dwell_time");
    if (!(hysteresis >= 0.0)) throw ConfigError("hysteresis must be >= 0", "bank.hysteresis");
    if (!(h > 0.0)) throw ConfigError("step must be positive", "simulation.h");
    if (!(t1 > t0)) throw ConfigError("t1 must exceed t0", "simulation.t1");
    if (csv_stride < 1) throw ConfigError("csv_stride must be >= 1", "simulation.csv_stride");
    try {
        make_signal(disturbance).validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("disturbance: ") + e.what(), "disturbance");
    }
    if (sweep) {
        if (sweep->parameter == "rho_p") {
            if (disturbance.preset != "mixed") throw ConfigError("rho_p sweeps need the mixed preset", "sweep.parameter");
        } else if (sweep->parameter == "rho_t") {
            if (disturbance.preset != "inserted") throw ConfigError("rho_t sweeps need the inserted preset", "sweep.parameter");
        } else {
            throw ConfigError("sweep parameter must be rho_p or rho_t", "sweep.parameter");
        }
        if (sweep->grid.empty()) throw ConfigError("sweep grid is empty", "sweep.grid");
        for (double v : sweep->grid) {
            if (!(v >= 0.0 && v <= 0.5)) throw ConfigError("sweep values must lie in [0, 0.5]", "sweep.grid");
        }
    }
}

ScenarioConfig builtin_benchmark() {
    ScenarioConfig c;
    c.name = "low";
    c.plant.A = rows({{-1.175, 0.9871}, {-8.458, -0.8776}});
    c.plant.B2 = rows({{-0.194, -0.03593}, {-19.29, -3.803}});
    c.plant.B1 = rows({{1.0}, {4.0}});
    c.plant.C = rows({{0.0, 4.0}, {0.0, 0.0}, {0.0, 0.0}});
    c.plant.D2 = rows({{0.0, 0.0}, {2.0, 0.0}, {0.0, 2.0}});
    c.plant.D1 = Matrix::Zero(3, 1);
    c.controllers = {
        {"K_e", rows({{-1.6360, 39.0849}, {-0.3228, 7.7057}}), make_band(BandKind::LF, {1e6})},
        {"K_f1", rows({{0.1048, 15.0897}, {0.0205, 2.9760}}), make_band(BandKind::LF, {1.0})},
        {"K_f2", rows({{-1.6368, 39.1121}, {-0.3229, 7.7111}}), make_band(BandKind::MF, {1.0, 10.0})},
        {"K_f3", rows({{-0.4217, -0.0433}, {-0.0832, -0.0085}}), make_band(BandKind::HF, {10.0})},
    };
    c.bank = {"K_f1", "K_f3"};
    c.q_values = {1e6 * rows({{0.8559, -0.2207}, {-0.2207, 0.0613}}), rows({{0.0211, 0.0285}, {0.0285, 0.1449}})};
    c.passive = {{"PassC-EF", "K_e"}, {"PassC-LF", "K_f1"}, {"PassC-HF", "K_f3"}};
    c.disturbance.preset = "low";
    return c;
}

std::vector<PresetInfo> preset_list() {
    return {{"low", "low-frequency tones 0.1/0.2/0.3 rad/s, t in [0, 500]"},
            {"high", "high-frequency tones 100/200/300 rad/s, t in [0, 500]"},
            {"mixed-sweep", "high tones plus rho_p times low tones, rho_p = 0, 0.1, ..., 0.5"},
            {"inserted-sweep", "low block (scaled 0.1) of length rho_t*500 s between two 500 s high blocks, rho_t = 0, 0.1, ..., 0.5"}};
}

ScenarioConfig preset(const std::string& name) {
    auto c = builtin_benchmark();
    c.name = name;
    const std::vector<double> grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    if (name == "low") {
        c.disturbance.preset = "low";
    } else if (name == "high") {
        c.disturbance.preset = "high";
    } else if (name == "mixed-sweep") {
        c.disturbance.preset = "mixed";
        c.sweep = SweepConfig{"rho_p", grid};
    } else if (name == "inserted-sweep") {
        c.disturbance.preset = "inserted";
        c.disturbance.rho_star = 0.1;
        c.disturbance.T = 500.0;
        c.sweep = SweepConfig{"rho_t", grid};
    } else {
        throw ConfigError("unknown preset '" + name + "'", name);
    }
    return c;
}

// ---- JSON ----

namespace {

json matrix_json(const Matrix& M) {
    json a = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        a.push_back(r);
    }
    return a;
}

Matrix matrix_from(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty()) throw ConfigError("expected a non-empty nested array", key);
    const auto r = j.size();
    if (!j[0].is_array() || j[0].empty()) throw ConfigError("expected rows as arrays", key);
    const auto c = j[0].size();
    Matrix M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    for (std::size_t i = 0; i < r; ++i) {
        if (!j[i].is_array() || j[i].size() != c) throw ConfigError("ragged matrix rows", key);
        for (std::size_t k = 0; k < c; ++k) {
            if (!j[i][k].is_number()) throw ConfigError("matrix entries must be numbers", key);
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
        }
    }
    return M;
}

const json& member(const json& j, const char* name, const std::string& key) {
    if (!j.is_object() || !j.contains(name)) throw ConfigError(std::string("missing field '") + name + "'", key);
    return j.at(name);
}

double number(const json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError("expected a number", key);
    return j.get<double>();
}

std::string text(const json& j, const std::string& key) {
    if (!j.is_string()) throw ConfigError("expected a string", key);
    return j.get<std::string>();
}

json band_json(const FrequencyBand& b) { return {{"kind", to_string(b.kind())}, {"cutoffs", b.cutoffs()}}; }

FrequencyBand band_from(const json& j, const std::string& key) {
    try {
        std::vector<double> cut;
        for (const auto& v : member(j, "cutoffs", key)) cut.push_back(number(v, key + ".cutoffs"));
        return make_band(band_kind_from_string(text(member(j, "kind", key), key + ".kind")), cut);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what(), key);
    }
}

json signal_json(const SignalSpec& s) {
    switch (s.kind) {
        case SignalKind::sum_of_sines: {
            json tones = json::array();
            for (const auto& t : s.tones) tones.push_back({{"amplitude", t.amplitude}, {"omega", t.omega}, {"phase", t.phase}});
            return {{"kind", "sum_of_sines"}, {"tones", tones}};
        }
        case SignalKind::mixed:
            return {{"kind", "mixed"}, {"rho", s.rho}, {"base", signal_json(s.parts[0])}, {"added", signal_json(s.parts[1])}};
        case SignalKind::piecewise: {
            json sched = json::array();
            for (const auto& seg : s.schedule) {
                sched.push_back({{"start", seg.start}, {"end", seg.end}, {"signal", signal_json(seg.signal[0])}});
            }
            return {{"kind", "piecewise"}, {"schedule", sched}};
        }
    }
    return {};
}

SignalSpec signal_from(const json& j, const std::string& key) {
    const auto kind = text(member(j, "kind", key), key + ".kind");
    try {
        if (kind == "sum_of_sines") {
            std::vector<Tone> tones;
            for (const auto& t : member(j, "tones", key)) {
                tones.push_back({number(member(t, "amplitude", key + ".tones"), key + ".tones"),
                                 number(member(t, "omega", key + ".tones"), key + ".tones"),
                                 t.contains("phase") ? number(t.at("phase"), key + ".tones") : 0.0});
            }
            return sum_of_sines(tones);
        }
        if (kind == "mixed") {
            return mixed(signal_from(member(j, "base", key), key + ".base"), number(member(j, "rho", key), key + ".rho"),
                         signal_from(member(j, "added", key), key + ".added"));
        }
        if (kind == "piecewise") {
            std::vector<std::pair<std::pair<double, double>, SignalSpec>> segs;
            for (const auto& s : member(j, "schedule", key)) {
                segs.push_back({{number(member(s, "start", key), key + ".schedule"), number(member(s, "end", key), key + ".schedule")},
                                signal_from(member(s, "signal", key), key + ".schedule.signal")});
            }
            return piecewise(std::move(segs));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what(), key);
    }
    throw ConfigError("unknown signal kind '" + kind + "'", key + ".kind");
}

}  // namespace

ScenarioConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object", "");
    ScenarioConfig c;
    c.schema_version = static_cast<int>(number(member(j, "schema_version", "schema_version"), "schema_version"));
    if (c.schema_version != 1) throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version), "schema_version");
    c.name = j.contains("name") ? text(j.at("name"), "name") : "scenario";

    const auto& p = member(j, "plant", "plant");
    c.plant.A = matrix_from(member(p, "A", "plant.A"), "plant.A");
    c.plant.B1 = matrix_from(member(p, "B1", "plant.B1"), "plant.B1");
    c.plant.B2 = matrix_from(member(p, "B2", "plant.B2"), "plant.B2");
    c.plant.C = matrix_from(member(p, "C", "plant.C"), "plant.C");
    c.plant.D1 = matrix_from(member(p, "D1", "plant.D1"), "plant.D1");
    c.plant.D2 = matrix_from(member(p, "D2", "plant.D2"), "plant.D2");

    const auto& ctrls = member(j, "controllers", "controllers");
    if (!ctrls.is_array()) throw ConfigError("controllers must be an array", "controllers");
    for (std::size_t k = 0; k < ctrls.size(); ++k) {
        const std::string key = "controllers[" + std::to_string(k) + "]";
        c.controllers.push_back({text(member(ctrls[k], "name", key), key + ".name"),
                                 matrix_from(member(ctrls[k], "K", key), key + ".K"),
                                 band_from(member(ctrls[k], "band", key), key + ".band")});
    }

    const auto& b = member(j, "bank", "bank");
    c.bank.clear();
    for (const auto& n : member(b, "controllers", "bank")) c.bank.push_back(text(n, "bank.controllers"));
    c.q_source = b.contains("q_source") ? q_source_from_string(text(b.at("q_source"), "bank.q_source")) : QSource::published;
    c.q_values.clear();
    if (b.contains("Q")) {
        for (const auto& q : b.at("Q")) c.q_values.push_back(matrix_from(q, "bank.Q"));
    }
    if (b.contains("gamma_tol")) c.gamma_tol = number(b.at("gamma_tol"), "bank.gamma_tol");
    if (b.contains("in_band_index")) c.in_band_index = static_cast<int>(number(b.at("in_band_index"), "bank.in_band_index"));
    if (b.contains("dwell_time")) c.dwell_time = number(b.at("dwell_time"), "bank.dwell_time");
    if (b.contains("hysteresis")) c.hysteresis = number(b.at("hysteresis"), "bank.hysteresis");

    c.passive.clear();
    if (j.contains("passive")) {
        const auto& pj = j.at("passive");
        if (!pj.is_array()) throw ConfigError("passive must be an array of {label, controller}", "passive");
        for (const auto& e : pj) {
            c.passive.push_back({text(member(e, "label", "passive"), "passive.label"),
                                 text(member(e, "controller", "passive"), "passive.controller")});
        }
    }

    const auto& d = member(j, "disturbance", "disturbance");
    if (d.contains("signal")) {
        c.disturbance.preset.clear();
        c.disturbance.explicit_spec = signal_from(d.at("signal"), "disturbance.signal");
    } else {
        c.disturbance.preset = text(member(d, "preset", "disturbance"), "disturbance.preset");
        if (d.contains("rho_p")) c.disturbance.rho_p = number(d.at("rho_p"), "disturbance.rho_p");
        if (d.contains("rho_star")) c.disturbance.rho_star = number(d.at("rho_star"), "disturbance.rho_star");
        if (d.contains("T")) c.disturbance.T = number(d.at("T"), "disturbance.T");
        if (d.contains("rho_t")) c.disturbance.rho_t = number(d.at("rho_t"), "disturbance.rho_t");
    }

    if (j.contains("simulation")) {
        const auto& s = j.at("simulation");
        if (s.contains("t0")) c.t0 = number(s.at("t0"), "simulation.t0");
        if (s.contains("t1")) c.t1 = number(s.at("t1"), "simulation.t1");
        if (s.contains("h")) c.h = number(s.at("h"), "simulation.h");
        if (s.contains("csv_stride")) c.csv_stride = static_cast<int>(number(s.at("csv_stride"), "simulation.csv_stride"));
    }
    if (j.contains("sweep") && !j.at("sweep").is_null()) {
        const auto& s = j.at("sweep");
        SweepConfig sw;
        sw.parameter = text(member(s, "parameter", "sweep"), "sweep.parameter");
        for (const auto& v : member(s, "grid", "sweep")) sw.grid.push_back(number(v, "sweep.grid"));
        c.sweep = sw;
    }
    c.validate();
    return c;
}

json config_to_json(const ScenarioConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["name"] = c.name;
    j["plant"] = {{"A", matrix_json(c.plant.A)},   {"B1", matrix_json(c.plant.B1)}, {"B2", matrix_json(c.plant.B2)},
                  {"C", matrix_json(c.plant.C)},   {"D1", matrix_json(c.plant.D1)}, {"D2", matrix_json(c.plant.D2)}};
    json ctrls = json::array();
    for (const auto& g : c.controllers) ctrls.push_back({{"name", g.name}, {"K", matrix_json(g.K)}, {"band", band_json(g.band)}});
    j["controllers"] = ctrls;
    json qs = json::array();
    for (const auto& Q : c.q_values) qs.push_back(matrix_json(Q));
    j["bank"] = {{"controllers", c.bank},   {"Q", qs},
                 {"q_source", to_string(c.q_source)}, {"gamma_tol", c.gamma_tol},
                 {"in_band_index", c.in_band_index},   {"dwell_time", c.dwell_time},
                 {"hysteresis", c.hysteresis}};
    json passive = json::array();
    for (const auto& [label, name] : c.passive) passive.push_back({{"label", label}, {"controller", name}});
    j["passive"] = passive;
    if (c.disturbance.preset.empty()) {
        j["disturbance"] = {{"signal", signal_json(c.disturbance.explicit_spec)}};
    } else {
        j["disturbance"] = {{"preset", c.disturbance.preset}, {"rho_p", c.disturbance.rho_p}, {"rho_star", c.disturbance.rho_star},
                            {"T", c.disturbance.T},           {"rho_t", c.disturbance.rho_t}};
    }
    j["simulation"] = {{"t0", c.t0}, {"t1", c.t1}, {"h", c.h}, {"csv_stride", c.csv_stride}};
    if (c.sweep) j["sweep"] = {{"parameter", c.sweep->parameter}, {"grid", c.sweep->grid}};
    return j;
}

json design_to_json(const SwitchingDesign& d, const std::vector<std::string>& names) {
    json j;
    j["schema_version"] = 1;
    j["feasible"] = d.feasible;
    j["gamma_tol"] = d.gamma_tol;
    j["in_band_index"] = d.in_band_index;
    j["message"] = d.message;
    json entries = json::array();
    for (std::size_t i = 0; i < d.gains.size(); ++i) {
        json e;
        e["controller"] = i < names.size() ? names[i] : "controller" + std::to_string(i + 1);
        e["K"] = matrix_json(d.gains[i]);
        e["band"] = band_json(d.bands[i]);
        if (i < d.Q.size()) e["Q"] = matrix_json(d.Q[i]);
        if (i < d.gammas.size()) e["gamma"] = d.gammas[i];
        entries.push_back(e);
    }
    j["entries"] = entries;
    j["certificate"] = {{"pass", d.certificate.pass}, {"worst", d.certificate.worst}, {"worst_block", d.certificate.worst_label}};
    return j;
}

json error_record(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        return {{"error", err->kind()}, {"message", err->what()}, {"key", err->key()}};
    }
    return {{"error", "internal"}, {"message", e.what()}, {"key", ""}};
}

}  // namespace fdsc::bench
