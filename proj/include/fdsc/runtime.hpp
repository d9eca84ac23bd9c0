#pragma once

#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "fdsc/model.hpp"

namespace fdsc {

struct BankEntry {
    std::string name;
    Matrix K;
    FrequencyBand band;
    Matrix Q;
};

// Controllers selected by the argmax of their instantaneous excited power.
struct ControllerBank {
    std::vector<BankEntry> entries;
    double dwell_time = 0.0;
    double hysteresis = 0.0;

    int size() const { return static_cast<int>(entries.size()); }
    // Checks gain shapes against the plant, Q > 0 and the guard values.
    void validate(const StateSpacePlant& plant) const;
};

// [xdot; x]^T (Psi (x) Q) [xdot; x] for real vectors; the cross terms of the
// MF Psi cancel, leaving -xdot'Q xdot - w1 w2 x'Qx.
double fd_epf(const Vector& x, const Vector& xdot, const FrequencyBand& band, const Matrix& Q);

struct SwitchState {
    int index = -1;  // -1: no incumbent yet
    double last_switch_time = -std::numeric_limits<double>::infinity();
};

// Argmax of fd_epf over the bank. Ties go to the incumbent, then the lowest
// index. Inside the dwell time the incumbent is kept; with hysteresis a
// challenger must beat the incumbent by that amount.
int select_controller(const Vector& x, const Vector& xdot, const ControllerBank& bank, const SwitchState& prev,
                      double now);

// Disturbance descriptions. A mixed signal is base(t) + rho * added(t); a
// piecewise signal dispatches on contiguous [start, end) segments, the last
// one closed at its end.
struct Tone {
    double amplitude = 1.0;
    double omega = 0.0;
    double phase = 0.0;
};

struct SignalSpec;

struct Segment {
    double start = 0.0;
    double end = 0.0;
    std::vector<SignalSpec> signal;  // exactly one element
};

enum class SignalKind { sum_of_sines, mixed, piecewise };

struct SignalSpec {
    SignalKind kind = SignalKind::sum_of_sines;
    std::vector<Tone> tones;
    double rho = 0.0;
    std::vector<SignalSpec> parts;  // mixed: {base, added}
    std::vector<Segment> schedule;

    void validate() const;
};

SignalSpec sum_of_sines(std::vector<Tone> tones);
SignalSpec mixed(SignalSpec base, double rho, SignalSpec added);
SignalSpec piecewise(std::vector<std::pair<std::pair<double, double>, SignalSpec>> segments);

// Benchmark presets: low tones 0.1/0.2/0.3 rad/s, high tones 100/200/300 rad/s,
// high plus rho_p times low, and a low block of length rho_t*T scaled by
// rho_star inserted after T seconds of high tones, followed by T more.
SignalSpec preset_low();
SignalSpec preset_high();
SignalSpec preset_mixed(double rho_p);
SignalSpec preset_inserted(double rho_star, double T, double rho_t);
// Horizon end implied by a signal: the schedule end for piecewise signals,
// otherwise the fallback.
double natural_horizon(const SignalSpec& spec, double fallback);

class Disturbance {
public:
    explicit Disturbance(SignalSpec spec);
    double operator()(double t) const;
    const SignalSpec& spec() const { return spec_; }

private:
    SignalSpec spec_;
};

struct SwitchEvent {
    double time;
    int from;
    int to;
};

struct Trajectory {
    std::vector<double> t;
    Matrix x, xdot, u, z;  // one column per sample
    std::vector<double> d;
    std::vector<int> sigma;
    std::vector<SwitchEvent> switches;
    // Samples where the selected controller, evaluated with its own xdot,
    // would not select itself (the law was evaluated with the held xdot).
    std::vector<int> ambiguous;
    bool sliding_warning = false;
    double sliding_warning_time = 0.0;
    std::vector<std::string> warnings;

    int samples() const { return static_cast<int>(t.size()); }
    std::vector<double> switch_times() const;
};

struct SimulationOptions {
    double t0 = 0.0;
    double t1 = 500.0;
    double h = 1e-3;
    // Sliding-motion guard: warn when more than this fraction of steps in a
    // window of the given length switch.
    double chatter_window = 1.0;
    double chatter_fraction = 0.5;
};

// Fixed-step RK4 on xdot = (A + B2 K_sigma) x + B1 d(t) with sigma held over
// each step. Needs a single disturbance channel.
Trajectory simulate_switched(const StateSpacePlant& plant, const ControllerBank& bank, const Disturbance& d,
                             const Vector& x0, const SimulationOptions& options = {});

// Single fixed gain, same integrator.
Trajectory simulate_fixed(const StateSpacePlant& plant, const Matrix& K, const Disturbance& d, const Vector& x0,
                          const SimulationOptions& options = {});

// Header t,x1..xn,xdot1..xdotn,u1..,z1..,d,sigma.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, int stride = 1);
// Header t_switch,from,to.
void write_switch_csv(std::ostream& out, const Trajectory& traj);

// Trapezoid integral of fd_epf over the samples inside [a, b].
double fd_eef(const Trajectory& traj, const FrequencyBand& band, const Matrix& Q, double a, double b);

// Inclusive sample range [first, last] inside the window; throws on a window
// outside the trajectory or with fewer than two samples.
std::pair<int, int> window_samples(const std::vector<double>& t, double a, double b);

}  // namespace fdsc
