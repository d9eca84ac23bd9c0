#include "fdsc/metrics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>

#include "fdsc/error.hpp"

namespace fdsc {

namespace {

template <class F>
double trapezoid(const std::vector<double>& t, int first, int last, F&& f) {
    double acc = 0.0;
    double prev = f(first);
    for (int k = first + 1; k <= last; ++k) {
        const double cur = f(k);
        acc += 0.5 * (t[static_cast<std::size_t>(k)] - t[static_cast<std::size_t>(k - 1)]) * (prev + cur);
        prev = cur;
    }
    return acc;
}

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

double output_energy(const Trajectory& traj, double a, double b) {
    const auto [first, last] = window_samples(traj.t, a, b);
    return trapezoid(traj.t, first, last, [&](int k) { return traj.z.col(k).squaredNorm(); });
}

double l2_gain_ratio(const Trajectory& traj, double a, double b) {
    const auto [first, last] = window_samples(traj.t, a, b);
    const double dd = trapezoid(traj.t, first, last, [&](int k) {
        const double v = traj.d[static_cast<std::size_t>(k)];
        return v * v;
    });
    if (!(dd > 1e-12)) throw InvalidArgument("disturbance energy over the window is zero; ratio undefined", "window");
    const double zz = trapezoid(traj.t, first, last, [&](int k) { return traj.z.col(k).squaredNorm(); });
    return zz / dd;
}

BandEnergyReport dominance_degree(const std::vector<double>& t, const std::vector<double>& values,
                                  const FrequencyBand& band, double a, double b) {
    if (t.size() != values.size()) throw DimensionError("time and value arrays differ in length");
    if (!(b > a)) throw InvalidArgument("window end must exceed its start", "window");
    const double tol = 1e-9 * (1.0 + std::max(std::abs(a), std::abs(b)));
    const auto first = std::lower_bound(t.begin(), t.end(), a - tol) - t.begin();
    const auto stop = std::lower_bound(t.begin(), t.end(), b - tol) - t.begin();
    const auto count = stop - first;
    if (count < 64) throw InvalidArgument("window holds fewer than 64 samples", "window");
    const double dt = t[static_cast<std::size_t>(first + 1)] - t[static_cast<std::size_t>(first)];
    for (auto k = first + 1; k < stop; ++k) {
        const double step = t[static_cast<std::size_t>(k)] - t[static_cast<std::size_t>(k - 1)];
        if (std::abs(step - dt) > 1e-6 * dt) throw InvalidArgument("samples are not uniformly spaced", "t");
    }
    if (!(std::numbers::pi / dt > band.highest_cutoff())) {
        throw InvalidArgument("sample rate too low for the band's cutoff", "window");
    }

    const int n = static_cast<int>(count);
    std::vector<double> in(values.begin() + first, values.begin() + stop);
    std::vector<fftw_complex> out(static_cast<std::size_t>(n / 2 + 1));
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(n, in.data(), out.data(), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }

    BandEnergyReport r;
    r.window_start = a;
    r.window_end = b;
    const double dw = 2.0 * std::numbers::pi / (n * dt);
    for (int k = 0; k <= n / 2; ++k) {
        const double re = out[static_cast<std::size_t>(k)][0];
        const double im = out[static_cast<std::size_t>(k)][1];
        const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
        const double p = (edge ? 1.0 : 2.0) * (re * re + im * im);
        r.total += p;
        if (band.contains(k * dw)) r.in_band += p;
    }
    r.alpha = r.total > 0.0 ? std::clamp(r.in_band / r.total, 0.0, 1.0) : 0.0;
    return r;
}

std::vector<BandEnergyReport> dominance_sweep(const std::vector<double>& t, const std::vector<double>& values,
                                              const FrequencyBand& band, double length, double step) {
    if (!(length > 0.0) || !(step > 0.0)) throw InvalidArgument("window length and step must be positive", "window");
    if (t.empty()) throw InvalidArgument("no samples", "t");
    std::vector<BandEnergyReport> rows;
    const double end = t.back();
    for (long long k = 0;; ++k) {
        const double a = t.front() + static_cast<double>(k) * step;
        if (a + length > end + 1e-9 * (1.0 + std::abs(end))) break;
        rows.push_back(dominance_degree(t, values, band, a, a + length));
    }
    return rows;
}

void write_dominance_csv(std::ostream& out, const std::vector<BandEnergyReport>& rows) {
    out << "window_start,window_end,alpha\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", r.window_start, r.window_end, r.alpha);
        out << buf;
    }
}

namespace {

SwitchingStats stats_over(const Trajectory& traj, int entries, int first, int last) {
    if (entries < 1) throw InvalidArgument("entry count must be >= 1", "entries");
    SwitchingStats s;
    s.duration.assign(static_cast<std::size_t>(entries), 0.0);
    for (int k = first; k <= last; ++k) {
        const int sig = traj.sigma[static_cast<std::size_t>(k)];
        if (sig < 0 || sig >= entries) throw InvalidArgument("sigma index exceeds the entry count", "entries");
        if (k > first && sig != traj.sigma[static_cast<std::size_t>(k - 1)]) ++s.switch_count;
        if (k < last) s.duration[static_cast<std::size_t>(sig)] += traj.t[static_cast<std::size_t>(k + 1)] - traj.t[static_cast<std::size_t>(k)];
    }
    s.beta.assign(static_cast<std::size_t>(entries), 0.0);
    double total = 0.0;
    for (double v : s.duration) total += v;
    if (total > 0.0) {
        for (int i = 0; i < entries; ++i) s.beta[static_cast<std::size_t>(i)] = s.duration[static_cast<std::size_t>(i)] / total;
    } else {
        s.beta[static_cast<std::size_t>(traj.sigma[static_cast<std::size_t>(first)])] = 1.0;
    }
    return s;
}

}  // namespace

SwitchingStats switching_stats(const Trajectory& traj, int entries) {
    if (traj.samples() == 0) throw InvalidArgument("trajectory is empty", "trajectory");
    return stats_over(traj, entries, 0, traj.samples() - 1);
}

SwitchingStats switching_stats(const Trajectory& traj, int entries, double a, double b) {
    const auto [first, last] = window_samples(traj.t, a, b);
    return stats_over(traj, entries, first, last);
}

Residue performance_residue(const Trajectory& traj, const std::vector<double>& gammas, double a, double b) {
    const int entries = static_cast<int>(gammas.size());
    auto stats = switching_stats(traj, entries, a, b);
    Residue r;
    r.ratio = l2_gain_ratio(traj, a, b);
    for (int i = 0; i < entries; ++i) {
        r.weighted_bound += stats.beta[static_cast<std::size_t>(i)] * gammas[static_cast<std::size_t>(i)] * gammas[static_cast<std::size_t>(i)];
    }
    r.epsilon = r.ratio - r.weighted_bound;
    return r;
}

}  // namespace fdsc
