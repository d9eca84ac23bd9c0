#include <cmath>

#include "fdsc/error.hpp"
#include "fdsc/runtime.hpp"

namespace fdsc {

void SignalSpec::validate() const {
    switch (kind) {
        case SignalKind::sum_of_sines:
            for (const auto& tone : tones) {
                if (!std::isfinite(tone.amplitude) || !std::isfinite(tone.omega) || !std::isfinite(tone.phase)) {
                    throw InvalidArgument("tone parameters must be finite", "tones");
                }
                if (tone.omega < 0.0) throw InvalidArgument("tone frequency must be non-negative", "tones");
            }
            break;
        case SignalKind::mixed:
            if (parts.size() != 2) throw InvalidArgument("mixed signal needs a base and an added part", "mix");
            if (!std::isfinite(rho)) throw InvalidArgument("mixing ratio must be finite", "rho_p");
            for (const auto& p : parts) p.validate();
            break;
        case SignalKind::piecewise:
            if (schedule.empty()) throw InvalidArgument("piecewise signal needs at least one segment", "schedule");
            for (std::size_t k = 0; k < schedule.size(); ++k) {
                const auto& seg = schedule[k];
                if (!(seg.end > seg.start)) throw InvalidArgument("segment end must exceed its start", "schedule");
                if (seg.signal.size() != 1) throw InvalidArgument("segment needs exactly one signal", "schedule");
                if (k > 0 && seg.start != schedule[k - 1].end) {
                    throw InvalidArgument("schedule segments must be contiguous and ordered", "schedule");
                }
                seg.signal[0].validate();
            }
            break;
    }
}

SignalSpec sum_of_sines(std::vector<Tone> tones) {
    SignalSpec s;
    s.kind = SignalKind::sum_of_sines;
    s.tones = std::move(tones);
    s.validate();
    return s;
}

SignalSpec mixed(SignalSpec base, double rho, SignalSpec added) {
    SignalSpec s;
    s.kind = SignalKind::mixed;
    s.rho = rho;
    s.parts = {std::move(base), std::move(added)};
    s.validate();
    return s;
}

SignalSpec piecewise(std::vector<std::pair<std::pair<double, double>, SignalSpec>> segments) {
    SignalSpec s;
    s.kind = SignalKind::piecewise;
    for (auto& [span, sig] : segments) s.schedule.push_back({span.first, span.second, {std::move(sig)}});
    s.validate();
    return s;
}

SignalSpec preset_low() { return sum_of_sines({{1.0, 0.1, 0.0}, {1.0, 0.2, 0.0}, {1.0, 0.3, 0.0}}); }

SignalSpec preset_high() { return sum_of_sines({{1.0, 100.0, 0.0}, {1.0, 200.0, 0.0}, {1.0, 300.0, 0.0}}); }

SignalSpec preset_mixed(double rho_p) { return mixed(preset_high(), rho_p, preset_low()); }

SignalSpec preset_inserted(double rho_star, double T, double rho_t) {
    if (!(T > 0.0)) throw InvalidArgument("T must be positive", "T");
    if (!(rho_t >= 0.0)) throw InvalidArgument("rho_t must be non-negative", "rho_t");
    SignalSpec low = mixed(sum_of_sines({}), rho_star, preset_low());
    std::vector<std::pair<std::pair<double, double>, SignalSpec>> segs;
    segs.push_back({{0.0, T}, preset_high()});
    if (rho_t > 0.0) segs.push_back({{T, T + rho_t * T}, low});
    segs.push_back({{T + rho_t * T, 2.0 * T + rho_t * T}, preset_high()});
    return piecewise(std::move(segs));
}

double natural_horizon(const SignalSpec& spec, double fallback) {
    if (spec.kind == SignalKind::piecewise && !spec.schedule.empty()) return spec.schedule.back().end;
    return fallback;
}

namespace {

double evaluate(const SignalSpec& s, double t) {
    switch (s.kind) {
        case SignalKind::sum_of_sines: {
            double v = 0.0;
            for (const auto& tone : s.tones) v += tone.amplitude * std::sin(tone.omega * t + tone.phase);
            return v;
        }
        case SignalKind::mixed:
            return evaluate(s.parts[0], t) + s.rho * evaluate(s.parts[1], t);
        case SignalKind::piecewise: {
            const auto& last = s.schedule.back();
            for (const auto& seg : s.schedule) {
                if ((t >= seg.start && t < seg.end) || (&seg == &last && t == seg.end)) {
                    return evaluate(seg.signal[0], t);
                }
            }
            throw InvalidArgument("signal queried outside its schedule at t = " + std::to_string(t), "schedule");
        }
    }
    return 0.0;
}

}  // namespace

Disturbance::Disturbance(SignalSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

double Disturbance::operator()(double t) const { return evaluate(spec_, t); }

}  // namespace fdsc
