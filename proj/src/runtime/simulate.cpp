#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>

#include "fdsc/error.hpp"
#include "fdsc/runtime.hpp"

namespace fdsc {

std::vector<double> Trajectory::switch_times() const {
    std::vector<double> out;
    out.reserve(switches.size());
    for (const auto& s : switches) out.push_back(s.time);
    return out;
}

namespace {

long long step_count(const SimulationOptions& o) {
    if (!(o.h > 0.0) || !std::isfinite(o.h)) throw InvalidArgument("step size must be positive", "h");
    const double span = o.t1 - o.t0;
    if (!(span > 0.0) || !std::isfinite(span)) throw InvalidArgument("time span must be non-empty", "t_span");
    const double steps = span / o.h;
    const long long n = std::llround(steps);
    if (n < 1 || std::abs(steps - static_cast<double>(n)) > 1e-6 * std::max(1.0, steps)) {
        throw InvalidArgument("time span must be an integer number of steps", "h");
    }
    return n;
}

struct Subsystem {
    Matrix A, Cz, K;
};

}  // namespace

Trajectory simulate_switched(const StateSpacePlant& plant, const ControllerBank& bank, const Disturbance& d,
                             const Vector& x0, const SimulationOptions& options) {
    bank.validate(plant);
    if (plant.disturbances() != 1) throw DimensionError("simulation supports a single disturbance channel", "B1");
    const int n = plant.states();
    if (x0.size() != n) throw DimensionError("initial state has the wrong size", "x0");
    if (!x0.allFinite()) throw InvalidArgument("initial state must be finite", "x0");
    const long long steps = step_count(options);
    const double h = options.h;

    std::vector<Subsystem> subs;
    for (const auto& e : bank.entries) subs.push_back({plant.A + plant.B2 * e.K, plant.C + plant.D2 * e.K, e.K});
    const Vector b1 = plant.B1.col(0);
    const Vector d1 = plant.D1.col(0);

    const auto samples = static_cast<Eigen::Index>(steps + 1);
    Trajectory tr;
    tr.t.resize(static_cast<std::size_t>(samples));
    tr.x.resize(n, samples);
    tr.xdot.resize(n, samples);
    tr.u.resize(plant.inputs(), samples);
    tr.z.resize(plant.outputs(), samples);
    tr.d.resize(static_cast<std::size_t>(samples));
    tr.sigma.resize(static_cast<std::size_t>(samples));

    auto rhs = [&](int i, const Vector& x, double dv, Vector& out) {
        out.noalias() = subs[static_cast<std::size_t>(i)].A * x;
        out += b1 * dv;
    };

    const long long window = std::max<long long>(1, std::llround(options.chatter_window / h));
    std::deque<long long> recent;

    Vector x = x0, xd_base(n), xd_c(n), k2(n), k3(n), k4(n), tmp(n);
    SwitchState state;
    for (long long k = 0; k < samples; ++k) {
        const double t = options.t0 + static_cast<double>(k) * h;
        const double dv = d(t);

        // The law is evaluated with the held controller's xdot. A winner whose
        // own xdot would favour another controller is still taken, and the
        // sample is flagged as ambiguous.
        int sigma;
        const int base = state.index >= 0 ? state.index : 0;
        rhs(base, x, dv, xd_base);
        const bool dwelling = state.index >= 0 && t - state.last_switch_time < bank.dwell_time;
        Vector* xdot = &xd_base;
        if (bank.size() == 1 || dwelling) {
            sigma = base;
        } else {
            const int c = select_controller(x, xd_base, bank, state, t);
            if (c == base) {
                sigma = base;
            } else {
                rhs(c, x, dv, xd_c);
                sigma = c;
                xdot = &xd_c;
                if (select_controller(x, xd_c, bank, state, t) != c) tr.ambiguous.push_back(static_cast<int>(k));
            }
        }
        if (state.index >= 0 && sigma != state.index) {
            tr.switches.push_back({t, state.index, sigma});
            state.last_switch_time = t;
            recent.push_back(k);
            while (!recent.empty() && recent.front() <= k - window) recent.pop_front();
            if (!tr.sliding_warning && static_cast<double>(recent.size()) > options.chatter_fraction * static_cast<double>(window)) {
                tr.sliding_warning = true;
                tr.sliding_warning_time = t;
                char buf[160];
                std::snprintf(buf, sizeof buf, "possible sliding motion: more than %g of steps switch within %g s near t = %g",
                              options.chatter_fraction, options.chatter_window, t);
                tr.warnings.emplace_back(buf);
            }
        }
        state.index = sigma;

        const auto& sub = subs[static_cast<std::size_t>(sigma)];
        const auto col = static_cast<Eigen::Index>(k);
        tr.t[static_cast<std::size_t>(k)] = t;
        tr.x.col(col) = x;
        tr.xdot.col(col) = *xdot;
        tr.u.col(col).noalias() = sub.K * x;
        tr.z.col(col).noalias() = sub.Cz * x;
        tr.z.col(col) += d1 * dv;
        tr.d[static_cast<std::size_t>(k)] = dv;
        tr.sigma[static_cast<std::size_t>(k)] = sigma;
        if (k == samples - 1) break;

        const Vector& k1 = *xdot;
        tmp = x + (0.5 * h) * k1;
        rhs(sigma, tmp, d(t + 0.5 * h), k2);
        tmp = x + (0.5 * h) * k2;
        rhs(sigma, tmp, d(t + 0.5 * h), k3);
        tmp = x + h * k3;
        rhs(sigma, tmp, d(t + h), k4);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) {
            const double tf = t + h;
            throw SimulationDiverged("state became non-finite at t = " + std::to_string(tf), tf);
        }
    }
    return tr;
}

Trajectory simulate_fixed(const StateSpacePlant& plant, const Matrix& K, const Disturbance& d, const Vector& x0,
                          const SimulationOptions& options) {
    ControllerBank bank;
    bank.entries.push_back({"fixed", K, make_band(BandKind::LF, {1.0}), Matrix::Identity(plant.states(), plant.states())});
    return simulate_switched(plant, bank, d, x0, options);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& tr, int stride) {
    if (stride < 1) throw InvalidArgument("stride must be >= 1", "stride");
    out << "t";
    for (Eigen::Index i = 0; i < tr.x.rows(); ++i) out << ",x" << i + 1;
    for (Eigen::Index i = 0; i < tr.xdot.rows(); ++i) out << ",xdot" << i + 1;
    for (Eigen::Index i = 0; i < tr.u.rows(); ++i) out << ",u" << i + 1;
    for (Eigen::Index i = 0; i < tr.z.rows(); ++i) out << ",z" << i + 1;
    out << ",d,sigma\n";
    char buf[48];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        out << buf;
    };
    for (int k = 0; k < tr.samples(); k += stride) {
        put(tr.t[static_cast<std::size_t>(k)]);
        for (const Matrix* m : {&tr.x, &tr.xdot, &tr.u, &tr.z}) {
            for (Eigen::Index i = 0; i < m->rows(); ++i) {
                out << ',';
                put((*m)(i, k));
            }
        }
        out << ',';
        put(tr.d[static_cast<std::size_t>(k)]);
        out << ',' << tr.sigma[static_cast<std::size_t>(k)] << '\n';
    }
}

void write_switch_csv(std::ostream& out, const Trajectory& tr) {
    out << "t_switch,from,to\n";
    char buf[48];
    for (const auto& s : tr.switches) {
        std::snprintf(buf, sizeof buf, "%.12g", s.time);
        out << buf << ',' << s.from << ',' << s.to << '\n';
    }
}

std::pair<int, int> window_samples(const std::vector<double>& t, double a, double b) {
    if (t.size() < 2) throw InvalidArgument("trajectory has fewer than two samples", "window");
    if (!(b > a)) throw InvalidArgument("window end must exceed its start", "window");
    const double tol = 1e-9 * (1.0 + std::max(std::abs(t.front()), std::abs(t.back())));
    if (a < t.front() - tol || b > t.back() + tol) throw InvalidArgument("window lies outside the trajectory", "window");
    const auto first = std::lower_bound(t.begin(), t.end(), a - tol) - t.begin();
    const auto last = (std::upper_bound(t.begin(), t.end(), b + tol) - t.begin()) - 1;
    if (last <= first) throw InvalidArgument("window contains fewer than two samples", "window");
    return {static_cast<int>(first), static_cast<int>(last)};
}

double fd_eef(const Trajectory& tr, const FrequencyBand& band, const Matrix& Q, double a, double b) {
    const auto [first, last] = window_samples(tr.t, a, b);
    double acc = 0.0;
    double prev = fd_epf(tr.x.col(first), tr.xdot.col(first), band, Q);
    for (int k = first + 1; k <= last; ++k) {
        const double cur = fd_epf(tr.x.col(k), tr.xdot.col(k), band, Q);
        acc += 0.5 * (tr.t[static_cast<std::size_t>(k)] - tr.t[static_cast<std::size_t>(k - 1)]) * (prev + cur);
        prev = cur;
    }
    return acc;
}

}  // namespace fdsc
