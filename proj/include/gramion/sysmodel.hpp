#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gramion/matrix.hpp"

namespace gramion::sysmodel {

/// Uniform simulation grid t_k = k * dt, k = 0..steps.
struct TimeGrid {
    double dt = 0.01;
    std::size_t steps = 100;

    [[nodiscard]] double horizon() const { return dt * static_cast<double>(steps); }
    [[nodiscard]] double time(std::size_t k) const { return dt * static_cast<double>(k); }
    /// Trapezoidal quadrature weights on the grid.
    [[nodiscard]] std::vector<double> trapezoid_weights() const;
};

/// When each node joins the network. Birth times are nondecreasing, so the
/// set of born nodes at any time is a prefix of the node order.
struct ActivationSchedule {
    std::vector<double> birth_times;
    double horizon = 1.0;
    double dt = 0.01;

    /// Node i (1-based) born at (i - 1) * dt.
    static ActivationSchedule growing(std::size_t n, double dt, double horizon);
    /// Every node present from t = 0.
    static ActivationSchedule fixed(std::size_t n, double dt, double horizon);

    [[nodiscard]] std::size_t steps() const;
    [[nodiscard]] TimeGrid grid() const { return TimeGrid{dt, steps()}; }
    /// Number of nodes with birth time <= t.
    [[nodiscard]] std::size_t born_by(double t) const;
    void validate(std::size_t n) const;
};

/// Parametrized LTV system x' = A(theta, t) x + B u, y = C x with symmetric
/// A. Off-diagonal (i, j) of A equals theta_ij once both nodes are born;
/// the diagonal holds the stabilization shift at all times.
struct LtvSystem {
    std::size_t n = 0;
    std::size_t j_in = 0;
    std::size_t o_out = 0;
    std::vector<double> theta;
    Matrix b;
    Matrix c;
    std::vector<double> x0;
    ActivationSchedule schedule;
    std::vector<double> stabilization_shift;

    [[nodiscard]] std::size_t p() const { return theta.size(); }
    void validate() const;
};

/// Diagonal offsets -(sum_j |theta_ij| + offset): strict diagonal dominance
/// of the fully grown matrix with a negative diagonal.
std::vector<double> stabilization_shift(std::span<const double> theta, std::size_t n,
                                        double offset = 0.5);

/// Builds a validated system with x0 = 0 and the default stabilization.
LtvSystem make_system(std::vector<double> theta, std::size_t n, Matrix b, Matrix c,
                      ActivationSchedule schedule, double stabilization_offset = 0.5);

Matrix assemble_a(const LtvSystem& sys, double t);
/// A(theta, t) for an arbitrary parameter vector of the system's layout.
Matrix assemble_a(const LtvSystem& sys, std::span<const double> theta, double t);
/// A with the first `born` nodes active.
Matrix assemble_a_born(const LtvSystem& sys, std::span<const double> theta, std::size_t born);

/// Input samples on the time grid, one row per grid point. A sample u_k acts
/// as an impulse of weight dt * u_k at t_k, so the discrete delta
/// (1/dt at k = 0) reproduces the continuous impulse response exactly.
struct InputSignal {
    Matrix samples;

    [[nodiscard]] std::size_t channels() const { return samples.cols(); }
};

InputSignal zero_input(std::size_t channels, std::size_t steps);
InputSignal impulse_input(std::size_t channel, std::size_t channels, double dt, std::size_t steps);

struct Trajectory {
    std::vector<double> times;
    Matrix outputs;               ///< (steps + 1) x outputs
    std::optional<Matrix> states; ///< (steps + 1) x states, when requested
};

/// Supplies the frozen system matrix for each integration step.
class StepOperator {
public:
    virtual ~StepOperator() = default;
    virtual const Matrix& at_step(std::size_t k) = 0;
};

/// Fixed-step RK4 with the step matrix frozen over each step. Records
/// y_k = C x_k at every grid point including t = 0. Throws NumericalError
/// when the state norm exceeds 1e12.
Trajectory integrate(StepOperator& op, const Matrix& b, const Matrix& c, const InputSignal& u,
                     std::span<const double> x_init, const TimeGrid& grid, bool keep_states);

/// A(theta, t) frozen at the midpoint of each step, rebuilt only when the set
/// of born nodes changes.
class LtvStepOperator final : public StepOperator {
public:
    LtvStepOperator(const LtvSystem& sys, std::span<const double> theta);
    const Matrix& at_step(std::size_t k) override;

private:
    const LtvSystem& sys_;
    std::span<const double> theta_;
    std::size_t born_ = static_cast<std::size_t>(-1);
    Matrix a_;
};

Trajectory simulate(const LtvSystem& sys, const InputSignal& u, std::span<const double> x_init,
                    bool keep_states = false);
/// Same as simulate but with a substitute parameter vector.
Trajectory simulate_with_theta(const LtvSystem& sys, std::span<const double> theta,
                               const InputSignal& u, std::span<const double> x_init,
                               bool keep_states = false);

/// Parameters promoted to constant states: state (x, theta) of dimension n + p
/// with theta' = 0. The state block reads its A entries from the parameter states.
struct AugmentedSystem {
    LtvSystem base;

    [[nodiscard]] std::size_t dim() const { return base.n + base.p(); }
    /// (x0, theta).
    [[nodiscard]] std::vector<double> initial_state() const;
};

AugmentedSystem augment(const LtvSystem& sys);

/// Simulates the augmented system from xi_init = (x, theta). Stored states,
/// when requested, include the (constant) parameter block.
Trajectory simulate(const AugmentedSystem& sys, const InputSignal& u,
                    std::span<const double> xi_init, bool keep_states = false);

struct LtiTriple {
    Matrix a;
    Matrix b;
    Matrix c;
};

/// Symmetric-A embedding: B^ = (C^T | B), C^ = (C ; B^T). Rejects A that is
/// not symmetric within 1e-10 relative (a general symmetrizer is not supported).
LtiTriple embed_symmetric(const Matrix& a, const Matrix& b, const Matrix& c);
LtvSystem embed_symmetric(const LtvSystem& sys);

/// ||y_full - y_red|| / ||y_full|| in the trapezoid-weighted discrete L2
/// norm over all channels and samples.
double relative_l2_error(const Trajectory& full, const Trajectory& reduced);
/// Pooled version over several response pairs (e.g. one per input channel).
double relative_l2_error(std::span<const Trajectory> full, std::span<const Trajectory> reduced);

}  // namespace gramion::sysmodel
