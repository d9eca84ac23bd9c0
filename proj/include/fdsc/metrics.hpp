#pragma once

#include <ostream>
#include <vector>

#include "fdsc/model.hpp"
#include "fdsc/runtime.hpp"

namespace fdsc {

// Trapezoid integral of z'z over the samples in [a, b].
double output_energy(const Trajectory& traj, double a, double b);

// int z'z / int d'd over [a, b]; throws when the disturbance energy is <= 1e-12.
double l2_gain_ratio(const Trajectory& traj, double a, double b);

struct BandEnergyReport {
    double window_start = 0.0;
    double window_end = 0.0;
    double in_band = 0.0;
    double total = 0.0;
    double alpha = 0.0;
};

// Rectangular-window DFT of the uniformly sampled values with t in [a, b).
// alpha is the share of one-sided |X_k|^2 whose bin frequency lies strictly
// inside the band. Needs >= 64 samples and a Nyquist rate above the band's
// highest finite cutoff.
BandEnergyReport dominance_degree(const std::vector<double>& t, const std::vector<double>& values,
                                  const FrequencyBand& band, double a, double b);

// Sliding windows of the given length advanced by step.
std::vector<BandEnergyReport> dominance_sweep(const std::vector<double>& t, const std::vector<double>& values,
                                              const FrequencyBand& band, double length, double step);

// window_start,window_end,alpha
void write_dominance_csv(std::ostream& out, const std::vector<BandEnergyReport>& rows);

struct SwitchingStats {
    std::vector<double> duration;  // seconds active per bank index
    std::vector<double> beta;      // duration share, sums to 1
    int switch_count = 0;
};

// Sample-and-hold attribution: [t_k, t_{k+1}) belongs to sigma[k].
SwitchingStats switching_stats(const Trajectory& traj, int entries);
SwitchingStats switching_stats(const Trajectory& traj, int entries, double a, double b);

// Measured slack of the switched performance statement: the energy ratio
// minus the beta-weighted sum of gamma_i^2. No sign is implied.
struct Residue {
    double ratio = 0.0;
    double weighted_bound = 0.0;
    double epsilon = 0.0;
};

Residue performance_residue(const Trajectory& traj, const std::vector<double>& gammas, double a, double b);

}  // namespace fdsc
