#include <cmath>

#include "fdsc/error.hpp"
#include "fdsc/runtime.hpp"

namespace fdsc {

void ControllerBank::validate(const StateSpacePlant& plant) const {
    plant.validate();
    if (entries.empty()) throw InvalidArgument("controller bank is empty", "controllers");
    if (!(dwell_time >= 0.0) || !std::isfinite(dwell_time)) throw InvalidArgument("dwell time must be >= 0", "dwell_time");
    if (!(hysteresis >= 0.0) || !std::isfinite(hysteresis)) throw InvalidArgument("hysteresis must be >= 0", "hysteresis");
    const int n = plant.states();
    for (const auto& e : entries) {
        if (e.K.rows() != plant.inputs() || e.K.cols() != n) {
            throw DimensionError("gain " + e.name + " must be " + std::to_string(plant.inputs()) + "x" + std::to_string(n),
                                 e.name);
        }
        if (!e.K.allFinite()) throw InvalidArgument("gain " + e.name + " has non-finite entries", e.name);
        if (e.Q.rows() != n || e.Q.cols() != n) throw DimensionError("Q of " + e.name + " has the wrong shape", e.name);
        if ((e.Q - e.Q.transpose()).norm() > 1e-12 * (1.0 + e.Q.norm())) {
            throw InvalidArgument("Q of " + e.name + " is not symmetric", e.name);
        }
        Eigen::LLT<Matrix> llt(0.5 * (e.Q + e.Q.transpose()));
        if (llt.info() != Eigen::Success) throw InvalidArgument("Q of " + e.name + " is not positive definite", e.name);
    }
}

double fd_epf(const Vector& x, const Vector& xdot, const FrequencyBand& band, const Matrix& Q) {
    if (x.size() != xdot.size() || Q.rows() != x.size() || Q.cols() != x.size()) {
        throw DimensionError("fd_epf: x, xdot and Q sizes differ");
    }
    const double xx = x.dot(Q * x);
    const double vv = xdot.dot(Q * xdot);
    switch (band.kind()) {
        case BandKind::LF: {
            const double w = band.cutoffs()[0];
            return w * w * xx - vv;
        }
        case BandKind::HF: {
            const double w = band.cutoffs()[0];
            return vv - w * w * xx;
        }
        case BandKind::MF:
            return -vv - band.cutoffs()[0] * band.cutoffs()[1] * xx;
    }
    return 0.0;
}

int select_controller(const Vector& x, const Vector& xdot, const ControllerBank& bank, const SwitchState& prev,
                      double now) {
    const int count = bank.size();
    const int incumbent = (prev.index >= 0 && prev.index < count) ? prev.index : -1;
    if (incumbent >= 0 && now - prev.last_switch_time < bank.dwell_time) return incumbent;

    std::vector<double> power(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const auto& e = bank.entries[static_cast<std::size_t>(i)];
        power[static_cast<std::size_t>(i)] = fd_epf(x, xdot, e.band, e.Q);
    }
    int best = 0;
    for (int i = 1; i < count; ++i) {
        if (power[static_cast<std::size_t>(i)] > power[static_cast<std::size_t>(best)]) best = i;
    }
    if (incumbent < 0) return best;
    const double p_in = power[static_cast<std::size_t>(incumbent)];
    if (p_in == power[static_cast<std::size_t>(best)]) return incumbent;
    if (bank.hysteresis > 0.0 && !(power[static_cast<std::size_t>(best)] > p_in + bank.hysteresis)) return incumbent;
    return best;
}

}  // namespace fdsc
