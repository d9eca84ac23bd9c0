#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fdsc/error.hpp"
#include "fdsc/runtime.hpp"
#include "support/aircraft.hpp"

using namespace fdsc;

namespace {

FrequencyBand lf(double w) { return make_band(BandKind::LF, {w}); }
FrequencyBand hf(double w) { return make_band(BandKind::HF, {w}); }

ControllerBank benchmark_bank() {
    ControllerBank bank;
    bank.entries = {{"LF", testdata::k_f1(), lf(1.0), testdata::q1()}, {"HF", testdata::k_f3(), hf(10.0), testdata::q2()}};
    return bank;
}

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

// Re([xdot; x]^* (Psi (x) Q) [xdot; x]) through the complex Kronecker product.
double kron_power(const Vector& x, const Vector& xdot, const FrequencyBand& band, const Matrix& Q) {
    const auto psi = psi_matrix(band);
    const auto n = x.size();
    CMatrix W(2 * n, 2 * n);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) W.block(r * n, c * n, n, n) = psi(r, c) * Q.cast<Complex>();
    Eigen::VectorXcd v(2 * n);
    v << xdot.cast<Complex>(), x.cast<Complex>();
    return (v.adjoint() * W * v)(0, 0).real();
}

SimulationOptions span(double t1, double h = 1e-3) {
    SimulationOptions o;
    o.t1 = t1;
    o.h = h;
    return o;
}

}  // namespace

TEST_CASE("fd_epf closed forms") {
    const Matrix I = Matrix::Identity(2, 2);
    CHECK(fd_epf(Vector::Zero(2), Vector::Zero(2), lf(1.0), I) == 0.0);
    CHECK(fd_epf(Vector::Zero(2), Vector::Zero(2), make_band(BandKind::MF, {1.0, 10.0}), testdata::q2()) == 0.0);
    CHECK(fd_epf(vec2(1, 0), Vector::Zero(2), lf(1.0), I) == 1.0);
    CHECK(fd_epf(vec2(1, 0), Vector::Zero(2), hf(10.0), I) == -100.0);
    CHECK_THROWS_AS(fd_epf(Vector::Zero(3), Vector::Zero(2), lf(1.0), I), DimensionError);

    std::mt19937 rng(7);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 50; ++trial) {
        Vector x = vec2(g(rng), g(rng)), xd = vec2(g(rng), g(rng));
        Matrix R = Matrix::Random(2, 2);
        Matrix Q = R * R.transpose() + 0.1 * I;
        for (const auto& band : {lf(0.7), hf(3.0), make_band(BandKind::MF, {0.5, 4.0})}) {
            const double expect = kron_power(x, xd, band, Q);
            CHECK(fd_epf(x, xd, band, Q) == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("select_controller rules") {
    auto bank = benchmark_bank();
    const Vector z = Vector::Zero(2);
    CHECK(select_controller(z, z, bank, {1, 0.0}, 5.0) == 1);
    CHECK(select_controller(z, z, bank, {0, 0.0}, 5.0) == 0);
    CHECK(select_controller(z, z, bank, {}, 5.0) == 0);

    // Pure position: LF power is positive, HF negative.
    const Vector x = vec2(1e-3, 0.0);
    CHECK(select_controller(x, z, bank, {1, 0.0}, 5.0) == 0);
    // Inside the dwell time the incumbent stays.
    bank.dwell_time = 1.0;
    CHECK(select_controller(x, z, bank, {1, 4.5}, 5.0) == 1);
    CHECK(select_controller(x, z, bank, {1, 4.0}, 5.0) == 0);
    bank.dwell_time = 0.0;

    // Hysteresis: the challenger must win by more than the margin.
    const double p0 = fd_epf(x, z, bank.entries[0].band, bank.entries[0].Q);
    const double p1 = fd_epf(x, z, bank.entries[1].band, bank.entries[1].Q);
    bank.hysteresis = (p0 - p1) * 1.01;
    CHECK(select_controller(x, z, bank, {1, 0.0}, 5.0) == 1);
    bank.hysteresis = (p0 - p1) * 0.99;
    CHECK(select_controller(x, z, bank, {1, 0.0}, 5.0) == 0);

    // Exact ties go to the lowest index when there is no incumbent.
    ControllerBank twin;
    twin.entries = {{"a", testdata::k_f1(), lf(1.0), Matrix::Identity(2, 2)}, {"b", testdata::k_f3(), lf(1.0), Matrix::Identity(2, 2)}};
    CHECK(select_controller(x, z, twin, {}, 0.0) == 0);
    CHECK(select_controller(x, z, twin, {1, 0.0}, 0.0) == 1);
}

TEST_CASE("bank validation") {
    const auto plant = testdata::aircraft();
    auto bank = benchmark_bank();
    CHECK_NOTHROW(bank.validate(plant));
    bank.entries[1].Q = -Matrix::Identity(2, 2);
    CHECK_THROWS_AS(bank.validate(plant), InvalidArgument);
    bank = benchmark_bank();
    bank.entries[0].K = Matrix::Zero(3, 2);
    CHECK_THROWS_AS(bank.validate(plant), DimensionError);
    bank = benchmark_bank();
    bank.dwell_time = -1.0;
    CHECK_THROWS_AS(bank.validate(plant), InvalidArgument);
    CHECK_THROWS_AS(ControllerBank{}.validate(plant), InvalidArgument);
}

TEST_CASE("disturbance presets") {
    auto low = [](double t) { return std::sin(0.1 * t) + std::sin(0.2 * t) + std::sin(0.3 * t); };
    auto high = [](double t) { return std::sin(100 * t) + std::sin(200 * t) + std::sin(300 * t); };
    Disturbance dl(preset_low()), dh(preset_high()), dm(preset_mixed(0.5));
    CHECK(dl(0.0) == 0.0);
    for (double t : {0.37, 12.5, 333.3}) {
        CHECK(dl(t) == doctest::Approx(low(t)).epsilon(1e-14));
        CHECK(dh(t) == doctest::Approx(high(t)).epsilon(1e-14));
        CHECK(dm(t) == doctest::Approx(high(t) + 0.5 * low(t)).epsilon(1e-13).scale(1.0));
    }

    Disturbance di(preset_inserted(0.1, 500.0, 0.2));
    CHECK(natural_horizon(di.spec(), 0.0) == 1100.0);
    for (double t : {0.0, 250.0, 499.999}) CHECK(di(t) == doctest::Approx(high(t)).epsilon(1e-12).scale(1.0));
    for (double t : {500.0, 550.5, 599.99}) CHECK(di(t) == doctest::Approx(0.1 * low(t)).epsilon(1e-12).scale(1.0));
    for (double t : {600.0, 900.0, 1100.0}) CHECK(di(t) == doctest::Approx(high(t)).epsilon(1e-12).scale(1.0));
    CHECK_THROWS_AS(di(1100.5), InvalidArgument);
    CHECK_THROWS_AS(di(-0.1), InvalidArgument);

    CHECK_THROWS_AS(piecewise({{{0.0, 1.0}, preset_low()}, {{2.0, 3.0}, preset_low()}}), InvalidArgument);
    CHECK_THROWS_AS(piecewise({{{1.0, 1.0}, preset_low()}}), InvalidArgument);
    CHECK_THROWS_AS(sum_of_sines({{1.0, -2.0, 0.0}}), InvalidArgument);
}

TEST_CASE("zero input and zero state give a zero trajectory") {
    auto tr = simulate_switched(testdata::aircraft(), benchmark_bank(), Disturbance(sum_of_sines({})), Vector::Zero(2), span(5.0));
    CHECK(tr.samples() == 5001);
    CHECK(tr.x.cwiseAbs().maxCoeff() == 0.0);
    CHECK(tr.z.cwiseAbs().maxCoeff() == 0.0);
    CHECK(tr.switches.empty());
    CHECK(tr.t.back() == 5.0);
}

TEST_CASE("switched loop is stable from a nonzero state") {
    auto tr = simulate_switched(testdata::aircraft(), benchmark_bank(), Disturbance(sum_of_sines({})), vec2(1.0, 1.0),
                                span(200.0));
    CHECK(tr.x.col(tr.samples() - 1).norm() < 1e-6);
    CHECK_FALSE(tr.sliding_warning);
}

TEST_CASE("stored xdot, replayed switching law and dwell contract") {
    const auto plant = testdata::aircraft();
    for (double dwell : {0.0, 0.05}) {
        auto bank = benchmark_bank();
        bank.dwell_time = dwell;
        Disturbance d(preset_mixed(0.2));
        auto tr = simulate_switched(plant, bank, d, Vector::Zero(2), span(60.0));
        REQUIRE(tr.switches.size() > 0);

        std::vector<Matrix> A;
        for (const auto& e : bank.entries) A.push_back(plant.A + plant.B2 * e.K);
        std::vector<char> flagged(static_cast<std::size_t>(tr.samples()), 0);
        for (int k : tr.ambiguous) flagged[static_cast<std::size_t>(k)] = 1;

        SwitchState state;
        int mismatched_xdot = 0, mismatched_sigma = 0;
        for (int k = 0; k < tr.samples(); ++k) {
            const int s = tr.sigma[static_cast<std::size_t>(k)];
            Vector expect = A[static_cast<std::size_t>(s)] * tr.x.col(k);
            expect += plant.B1.col(0) * tr.d[static_cast<std::size_t>(k)];
            if (expect != tr.xdot.col(k)) ++mismatched_xdot;
            if (!flagged[static_cast<std::size_t>(k)] &&
                select_controller(tr.x.col(k), tr.xdot.col(k), bank, state, tr.t[static_cast<std::size_t>(k)]) != s) {
                ++mismatched_sigma;
            }
            if (state.index >= 0 && s != state.index) state.last_switch_time = tr.t[static_cast<std::size_t>(k)];
            state.index = s;
        }
        CHECK(mismatched_xdot == 0);
        CHECK(mismatched_sigma == 0);

        // sigma changes exactly at the recorded switch times.
        std::size_t next = 0;
        for (int k = 1; k < tr.samples(); ++k) {
            if (tr.sigma[static_cast<std::size_t>(k)] != tr.sigma[static_cast<std::size_t>(k - 1)]) {
                REQUIRE(next < tr.switches.size());
                CHECK(tr.switches[next].time == tr.t[static_cast<std::size_t>(k)]);
                ++next;
            }
        }
        CHECK(next == tr.switches.size());
        auto times = tr.switch_times();
        for (std::size_t k = 1; k < times.size(); ++k) CHECK(times[k] - times[k - 1] >= dwell);
    }
}

TEST_CASE("single-entry bank matches a plain RK4 reference bit for bit") {
    const auto plant = testdata::aircraft();
    const Matrix K = testdata::k_e();
    Disturbance d(preset_mixed(0.3));
    const auto o = span(20.0);
    auto tr = simulate_fixed(plant, K, d, vec2(0.2, -0.1), o);

    const Matrix A = plant.A + plant.B2 * K;
    const Vector b = plant.B1.col(0);
    auto f = [&](const Vector& x, double t) -> Vector {
        Vector out(2);
        out.noalias() = A * x;
        out += b * d(t);
        return out;
    };
    Vector x = vec2(0.2, -0.1);
    const long long n = 20000;
    for (long long k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * o.h;
        const Vector k1 = f(x, t);
        const Vector k2 = f(x + (0.5 * o.h) * k1, t + 0.5 * o.h);
        const Vector k3 = f(x + (0.5 * o.h) * k2, t + 0.5 * o.h);
        const Vector k4 = f(x + o.h * k3, t + o.h);
        x += (o.h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    CHECK(tr.x.col(n) == x);
    for (int s : tr.sigma) CHECK(s == 0);
}

TEST_CASE("halving the step barely moves the terminal state") {
    const auto plant = testdata::aircraft();
    Disturbance d(preset_low());
    for (const Matrix& K : {testdata::k_f1(), testdata::k_e()}) {
        auto a = simulate_fixed(plant, K, d, Vector::Zero(2), span(500.0, 1e-3));
        auto b = simulate_fixed(plant, K, d, Vector::Zero(2), span(500.0, 5e-4));
        const Vector xa = a.x.col(a.samples() - 1), xb = b.x.col(b.samples() - 1);
        CHECK((xa - xb).norm() <= 1e-4 * xb.norm());
    }
}

TEST_CASE("simulation errors and guards") {
    const auto plant = testdata::aircraft();
    Disturbance d(preset_low());
    CHECK_THROWS_AS(simulate_switched(plant, benchmark_bank(), d, Vector::Zero(2), span(1.0, 0.0)), InvalidArgument);
    CHECK_THROWS_AS(simulate_switched(plant, benchmark_bank(), d, Vector::Zero(2), span(1.0, 0.3)), InvalidArgument);
    CHECK_THROWS_AS(simulate_switched(plant, benchmark_bank(), d, Vector::Zero(3), span(1.0)), DimensionError);
    auto two_channel = plant;
    two_channel.B1 = Matrix::Ones(2, 2);
    two_channel.D1 = Matrix::Zero(3, 2);
    CHECK_THROWS_AS(simulate_switched(two_channel, benchmark_bank(), d, Vector::Zero(2), span(1.0)), DimensionError);

    // A fast unstable mode overflows; the error carries the time.
    StateSpacePlant blow;
    blow.A = Matrix::Identity(1, 1) * 2000.0;
    blow.B1 = Matrix::Ones(1, 1);
    blow.B2 = Matrix::Ones(1, 1);
    blow.C = Matrix::Ones(1, 1);
    blow.D1 = Matrix::Zero(1, 1);
    blow.D2 = Matrix::Zero(1, 1);
    try {
        simulate_fixed(blow, Matrix::Zero(1, 1), Disturbance(sum_of_sines({})), Vector::Ones(1), span(2.0));
        FAIL("expected divergence");
    } catch (const SimulationDiverged& e) {
        CHECK(e.time() > 0.3);
        CHECK(e.time() < 0.4);
    }

    // A strict chattering threshold trips the sliding-motion warning.
    auto o = span(50.0);
    o.chatter_fraction = 0.005;
    auto tr = simulate_switched(plant, benchmark_bank(), d, Vector::Zero(2), o);
    CHECK(tr.sliding_warning);
    CHECK(tr.warnings.size() == 1);
}

TEST_CASE("trajectory CSV layout") {
    auto tr = simulate_switched(testdata::aircraft(), benchmark_bank(), Disturbance(preset_high()), Vector::Zero(2), span(0.01));
    std::ostringstream out, sw;
    write_trajectory_csv(out, tr);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,x1,x2,xdot1,xdot2,u1,u2,z1,z2,z3,d,sigma");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == tr.samples());
    write_switch_csv(sw, tr);
    CHECK(sw.str().rfind("t_switch,from,to\n", 0) == 0);
}

TEST_CASE("excited energy sign follows the disturbance band") {
    const auto plant = testdata::aircraft();
    CHECK(fd_eef(simulate_fixed(plant, testdata::k_f1(), Disturbance(sum_of_sines({})), Vector::Zero(2), span(2.0)),
                 lf(1.0), Matrix::Identity(2, 2), 0.0, 2.0) == 0.0);

    // Steady response to a 0.2 rad/s tone: positive on a low band, negative on a high band.
    auto tr = simulate_fixed(plant, testdata::k_f1(), Disturbance(sum_of_sines({{1.0, 0.2, 0.0}})), Vector::Zero(2),
                             span(200.0, 2e-3));
    const double period = 2.0 * std::numbers::pi / 0.2;
    const Matrix I = Matrix::Identity(2, 2);
    CHECK(fd_eef(tr, lf(1.0), I, 200.0 - period, 200.0) > 0.0);
    CHECK(fd_eef(tr, hf(10.0), I, 200.0 - period, 200.0) < 0.0);
    CHECK_THROWS_AS(fd_eef(tr, lf(1.0), I, 150.0, 150.0), InvalidArgument);
    CHECK_THROWS_AS(fd_eef(tr, lf(1.0), I, 150.0, 250.0), InvalidArgument);
}
