#include "gramion/sysmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gramion/error.hpp"
#include "gramion/hypnet.hpp"

namespace gramion::sysmodel {

namespace {

constexpr double kDivergenceNorm = 1e12;

std::size_t checked_steps(double horizon, double dt) {
    if (!(dt > 0.0) || !(horizon > 0.0) || !std::isfinite(horizon) || !std::isfinite(dt))
        throw ValidationError("time grid needs positive finite horizon and dt");
    const double ratio = horizon / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded)
        throw ValidationError("horizon / dt must be a positive integer, got " + std::to_string(ratio));
    return static_cast<std::size_t>(rounded);
}

void matvec_into(const Matrix& a, std::span<const double> x, std::span<double> y) {
    const std::size_t cols = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* row = a.data().data() + i * cols;
        double s = 0.0;
        for (std::size_t k = 0; k < cols; ++k) s += row[k] * x[k];
        y[i] = s;
    }
}

double weighted_sq(const Matrix& y, std::span<const double> w) {
    double s = 0.0;
    for (std::size_t k = 0; k < y.rows(); ++k) {
        double r = 0.0;
        for (double v : y.row(k)) r += v * v;
        s += w[k] * r;
    }
    return s;
}

double weighted_sq_diff(const Matrix& a, const Matrix& b, std::span<const double> w) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.rows(); ++k) {
        double r = 0.0;
        const auto ra = a.row(k);
        const auto rb = b.row(k);
        for (std::size_t j = 0; j < ra.size(); ++j) r += (ra[j] - rb[j]) * (ra[j] - rb[j]);
        s += w[k] * r;
    }
    return s;
}

std::vector<double> grid_weights(const std::vector<double>& times) {
    std::vector<double> w(times.size(), 0.0);
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double h = 0.5 * (times[k + 1] - times[k]);
        w[k] += h;
        w[k + 1] += h;
    }
    if (times.size() == 1) w[0] = 1.0;
    return w;
}

void check_comparable(const Trajectory& full, const Trajectory& reduced) {
    if (full.times.size() != reduced.times.size() || full.outputs.cols() != reduced.outputs.cols())
        throw ValidationError("relative_l2_error: trajectories have different grids or channels");
    for (std::size_t k = 0; k < full.times.size(); ++k)
        if (std::abs(full.times[k] - reduced.times[k]) > 1e-12 * std::max(1.0, std::abs(full.times[k])))
            throw ValidationError("relative_l2_error: time grids differ at sample " + std::to_string(k));
}

}  // namespace

std::vector<double> TimeGrid::trapezoid_weights() const {
    std::vector<double> w(steps + 1, dt);
    w.front() = 0.5 * dt;
    w.back() = 0.5 * dt;
    if (steps == 0) w[0] = 0.0;
    return w;
}

ActivationSchedule ActivationSchedule::growing(std::size_t n, double dt, double horizon) {
    ActivationSchedule s;
    s.dt = dt;
    s.horizon = horizon;
    s.birth_times.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.birth_times[i] = dt * static_cast<double>(i);
    return s;
}

ActivationSchedule ActivationSchedule::fixed(std::size_t n, double dt, double horizon) {
    ActivationSchedule s;
    s.dt = dt;
    s.horizon = horizon;
    s.birth_times.assign(n, 0.0);
    return s;
}

std::size_t ActivationSchedule::steps() const { return checked_steps(horizon, dt); }

std::size_t ActivationSchedule::born_by(double t) const {
    return static_cast<std::size_t>(
        std::upper_bound(birth_times.begin(), birth_times.end(), t) - birth_times.begin());
}

void ActivationSchedule::validate(std::size_t n) const {
    checked_steps(horizon, dt);
    if (birth_times.size() != n)
        throw ValidationError("schedule has " + std::to_string(birth_times.size()) +
                              " birth times for " + std::to_string(n) + " nodes");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(birth_times[i] >= 0.0) || birth_times[i] > horizon)
            throw ValidationError("birth time " + std::to_string(i) + " outside [0, horizon]");
        if (i > 0 && birth_times[i] < birth_times[i - 1])
            throw ValidationError("birth times must be nondecreasing");
    }
}

void LtvSystem::validate() const {
    if (n == 0) throw ValidationError("system needs at least one state");
    if (theta.size() != hypnet::parameter_count(n))
        throw ValidationError("theta has length " + std::to_string(theta.size()) + ", expected " +
                              std::to_string(hypnet::parameter_count(n)));
    if (b.rows() != n || b.cols() != j_in)
        throw ValidationError("B must be " + std::to_string(n) + "x" + std::to_string(j_in) +
                              ", got " + b.shape());
    if (c.rows() != o_out || c.cols() != n)
        throw ValidationError("C must be " + std::to_string(o_out) + "x" + std::to_string(n) +
                              ", got " + c.shape());
    if (x0.size() != n) throw ValidationError("x0 must have length " + std::to_string(n));
    if (stabilization_shift.size() != n)
        throw ValidationError("stabilization shift must have length " + std::to_string(n));
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(theta.begin(), theta.end(), finite) ||
        !std::all_of(x0.begin(), x0.end(), finite) ||
        !std::all_of(stabilization_shift.begin(), stabilization_shift.end(), finite) ||
        !b.all_finite() || !c.all_finite())
        throw ValidationError("system contains non-finite values");
    schedule.validate(n);
}

std::vector<double> stabilization_shift(std::span<const double> theta, std::size_t n, double offset) {
    const Matrix a = hypnet::matrix_from_theta(theta, n);
    std::vector<double> shift(n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (double v : a.row(i)) deg += std::abs(v);
        shift[i] = -(deg + offset);
    }
    return shift;
}

LtvSystem make_system(std::vector<double> theta, std::size_t n, Matrix b, Matrix c,
                      ActivationSchedule schedule, double stabilization_offset) {
    LtvSystem sys;
    sys.n = n;
    sys.j_in = b.cols();
    sys.o_out = c.rows();
    sys.stabilization_shift = stabilization_shift(theta, n, stabilization_offset);
    sys.theta = std::move(theta);
    sys.b = std::move(b);
    sys.c = std::move(c);
    sys.x0.assign(n, 0.0);
    sys.schedule = std::move(schedule);
    sys.validate();
    return sys;
}

Matrix assemble_a_born(const LtvSystem& sys, std::span<const double> theta, std::size_t born) {
    const std::size_t n = sys.n;
    Matrix a(n, n);
    born = std::min(born, n);
    for (std::size_t i = 0; i < born; ++i) {
        std::size_t k = hypnet::parameter_index(i, i + 1, n);
        for (std::size_t j = i + 1; j < born; ++j, ++k) {
            a(i, j) = theta[k];
            a(j, i) = theta[k];
        }
    }
    for (std::size_t i = 0; i < n; ++i) a(i, i) = sys.stabilization_shift[i];
    return a;
}

Matrix assemble_a(const LtvSystem& sys, std::span<const double> theta, double t) {
    if (theta.size() != sys.p()) throw ValidationError("assemble_a: parameter vector has wrong length");
    if (!(t >= 0.0) || t > sys.schedule.horizon * (1.0 + 1e-12))
        throw ValidationError("assemble_a: time " + std::to_string(t) + " outside [0, horizon]");
    return assemble_a_born(sys, theta, sys.schedule.born_by(t));
}

Matrix assemble_a(const LtvSystem& sys, double t) { return assemble_a(sys, sys.theta, t); }

InputSignal zero_input(std::size_t channels, std::size_t steps) {
    return InputSignal{Matrix(steps + 1, channels)};
}

InputSignal impulse_input(std::size_t channel, std::size_t channels, double dt, std::size_t steps) {
    if (channel >= channels)
        throw ValidationError("impulse channel " + std::to_string(channel) + " out of range (" +
                              std::to_string(channels) + " inputs)");
    if (!(dt > 0.0)) throw ValidationError("impulse needs dt > 0");
    InputSignal u = zero_input(channels, steps);
    u.samples(0, channel) = 1.0 / dt;
    return u;
}

Trajectory integrate(StepOperator& op, const Matrix& b, const Matrix& c, const InputSignal& u,
                     std::span<const double> x_init, const TimeGrid& grid, bool keep_states) {
    const std::size_t n = b.rows();
    if (x_init.size() != n)
        throw ValidationError("initial state has length " + std::to_string(x_init.size()) +
                              ", expected " + std::to_string(n));
    if (u.samples.rows() != grid.steps + 1 || u.channels() != b.cols())
        throw ValidationError("input signal must be " + std::to_string(grid.steps + 1) + "x" +
                              std::to_string(b.cols()) + ", got " + u.samples.shape());
    if (c.cols() != n) throw ValidationError("output matrix does not match state dimension");

    Trajectory traj;
    traj.times.resize(grid.steps + 1);
    traj.outputs = Matrix(grid.steps + 1, c.rows());
    if (keep_states) traj.states = Matrix(grid.steps + 1, n);

    const double dt = grid.dt;
    std::vector<double> x(x_init.begin(), x_init.end());
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    for (std::size_t k = 0; k <= grid.steps; ++k) {
        traj.times[k] = grid.time(k);
        const auto uk = u.samples.row(k);
        for (std::size_t j = 0; j < uk.size(); ++j) {
            const double w = dt * uk[j];
            if (w == 0.0) continue;
            for (std::size_t i = 0; i < n; ++i) x[i] += w * b(i, j);
        }
        matvec_into(c, x, traj.outputs.row(k));
        if (keep_states) std::copy(x.begin(), x.end(), traj.states->row(k).begin());
        if (k == grid.steps) break;

        const Matrix& a = op.at_step(k);
        matvec_into(a, x, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
        matvec_into(a, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
        matvec_into(a, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
        matvec_into(a, tmp, k4);
        double norm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            norm2 += x[i] * x[i];
        }
        if (!(norm2 <= kDivergenceNorm * kDivergenceNorm))
            throw NumericalError("simulation diverged at step " + std::to_string(k + 1) +
                                 " (t = " + std::to_string(grid.time(k + 1)) + ")");
    }
    return traj;
}

LtvStepOperator::LtvStepOperator(const LtvSystem& sys, std::span<const double> theta)
    : sys_(sys), theta_(theta) {
    if (theta.size() != sys.p()) throw ValidationError("parameter vector has wrong length");
}

const Matrix& LtvStepOperator::at_step(std::size_t k) {
    const double mid = sys_.schedule.dt * (static_cast<double>(k) + 0.5);
    const std::size_t born = sys_.schedule.born_by(mid);
    if (born != born_) {
        a_ = assemble_a_born(sys_, theta_, born);
        born_ = born;
    }
    return a_;
}

Trajectory simulate_with_theta(const LtvSystem& sys, std::span<const double> theta,
                               const InputSignal& u, std::span<const double> x_init,
                               bool keep_states) {
    LtvStepOperator op(sys, theta);
    return integrate(op, sys.b, sys.c, u, x_init, sys.schedule.grid(), keep_states);
}

Trajectory simulate(const LtvSystem& sys, const InputSignal& u, std::span<const double> x_init,
                    bool keep_states) {
    return simulate_with_theta(sys, sys.theta, u, x_init, keep_states);
}

std::vector<double> AugmentedSystem::initial_state() const {
    std::vector<double> xi(base.x0);
    xi.insert(xi.end(), base.theta.begin(), base.theta.end());
    return xi;
}

AugmentedSystem augment(const LtvSystem& sys) {
    sys.validate();
    return AugmentedSystem{sys};
}

Trajectory simulate(const AugmentedSystem& sys, const InputSignal& u,
                    std::span<const double> xi_init, bool keep_states) {
    const std::size_t n = sys.base.n;
    if (xi_init.size() != sys.dim())
        throw ValidationError("augmented initial state has length " + std::to_string(xi_init.size()) +
                              ", expected " + std::to_string(sys.dim()));
    const auto x = xi_init.first(n);
    const auto theta = xi_init.subspan(n);
    Trajectory traj = simulate_with_theta(sys.base, theta, u, x, keep_states);
    if (keep_states) {
        // theta' = 0: the parameter block repeats its initial value.
        Matrix full(traj.states->rows(), sys.dim());
        for (std::size_t k = 0; k < full.rows(); ++k) {
            auto row = full.row(k);
            std::copy(traj.states->row(k).begin(), traj.states->row(k).end(), row.begin());
            std::copy(theta.begin(), theta.end(), row.begin() + static_cast<std::ptrdiff_t>(n));
        }
        traj.states = std::move(full);
    }
    return traj;
}

LtiTriple embed_symmetric(const Matrix& a, const Matrix& b, const Matrix& c) {
    if (!a.square() || b.rows() != a.rows() || c.cols() != a.rows())
        throw ValidationError("embed_symmetric: inconsistent shapes A " + a.shape() + ", B " +
                              b.shape() + ", C " + c.shape());
    const double scale = std::max(a.max_abs(), 1e-300);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(a(i, j) - a(j, i)) > 1e-10 * scale)
                throw ValidationError(
                    "embed_symmetric: A is not symmetric; embedding a non-symmetric system needs "
                    "a general symmetrizer, which is not supported");
    return LtiTriple{a, hconcat(c.transpose(), b), vconcat(c, b.transpose())};
}

LtvSystem embed_symmetric(const LtvSystem& sys) {
    sys.validate();
    // A(theta, t) is symmetric by construction; check the fully grown matrix anyway.
    LtiTriple e = embed_symmetric(assemble_a(sys, sys.schedule.horizon), sys.b, sys.c);
    LtvSystem out = sys;
    out.b = std::move(e.b);
    out.c = std::move(e.c);
    out.j_in = out.b.cols();
    out.o_out = out.c.rows();
    return out;
}

double relative_l2_error(const Trajectory& full, const Trajectory& reduced) {
    return relative_l2_error(std::span<const Trajectory>(&full, 1),
                             std::span<const Trajectory>(&reduced, 1));
}

double relative_l2_error(std::span<const Trajectory> full, std::span<const Trajectory> reduced) {
    if (full.size() != reduced.size())
        throw ValidationError("relative_l2_error: response counts differ");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t r = 0; r < full.size(); ++r) {
        check_comparable(full[r], reduced[r]);
        const auto w = grid_weights(full[r].times);
        num += weighted_sq_diff(full[r].outputs, reduced[r].outputs, w);
        den += weighted_sq(full[r].outputs, w);
    }
    if (!(den > 0.0)) throw ValidationError("relative_l2_error: reference trajectory is identically zero");
    return std::sqrt(num / den);
}

}  // namespace gramion::sysmodel
