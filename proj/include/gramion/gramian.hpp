#pragma once

#include <cstddef>
#include <vector>

#include "gramion/matrix.hpp"
#include "gramion/sysmodel.hpp"

namespace gramion::gramian {

/// Perturbation sets for empirical gramians.
///
/// Input perturbation (h, i, j) applies an impulse of amplitude
/// input_scales[h] along input_rotations[i] * e_j at t = 0. State
/// perturbation (k, l, a) starts from state_scales[k] * state_rotations[l] * f_a.
/// Empty direction lists mean the full standard basis; empty rotation lists
/// mean the identity alone.
struct PerturbationScheme {
    std::vector<std::size_t> input_directions;
    std::vector<std::size_t> state_directions;
    std::vector<Matrix> input_rotations;
    std::vector<Matrix> state_rotations;
    std::vector<double> input_scales{1.0};
    std::vector<double> state_scales{1.0};

    /// Throws ValidationError unless directions are in range and unique,
    /// rotations are orthogonal within 1e-12, and scales are positive.
    void validate(std::size_t inputs, std::size_t states) const;
};

/// How parameter directions of the augmented state are perturbed.
enum class ParameterPerturbation {
    /// theta_k moves by scale * |theta_k|: the gramian measures relative
    /// sensitivity, and parameters that are zero at the nominal point
    /// (absent edges) are left unperturbed.
    relative,
    /// theta_k moves by scale.
    absolute,
};

struct JointOptions {
    /// One value broadcast to all parameters, or one value per parameter.
    std::vector<double> param_scales{0.1};
    ParameterPerturbation mode = ParameterPerturbation::relative;
    /// Drive parameter-perturbation trajectories with a unit impulse on every
    /// input and measure the deviation from the equally driven nominal
    /// trajectory. Without it a zero steady state leaves every parameter
    /// unobservable.
    bool excite = true;
};

/// Upper block row (W_X | W_M) of the joint gramian; the lower block row is zero.
struct JointGramian {
    Matrix wx;  ///< n x n
    Matrix wm;  ///< n x p

    [[nodiscard]] std::size_t n() const { return wx.rows(); }
    [[nodiscard]] std::size_t p() const { return wm.cols(); }
};

/// Empirical cross gramian of a square system (inputs == outputs):
///
///   W = 1/(|Q_u||R_u||Q_x||R_x|) sum_{h,i,k,l} 1/(c_h d_k)
///         sum_t w_t X_hi(t) S_i^T Y_kl(t) T_l^T
///
/// where column j of X_hi(t) is the state response to input perturbation
/// (h, i, j), column a of Y_kl(t) the output response to state perturbation
/// (k, l, a), and w_t are trapezoid weights truncating the integral at the
/// horizon. Entry (a, b) with identity rotations is sum_j int dx^j_a dy^b_j.
/// Steady state is the origin. State perturbations run in parallel; the
/// result does not depend on the thread count.
Matrix empirical_cross(const sysmodel::LtvSystem& sys, const PerturbationScheme& scheme);

/// Empirical cross gramian of the symmetric embedding of the parameter-
/// augmented system, returned as its (W_X, W_M) blocks. `scheme` covers the
/// embedded inputs and the n + p augmented state directions; parameter
/// directions are additionally scaled per `options`, and their columns are
/// normalized by the parameter scale only (so relative mode yields
/// |theta_k| times the sensitivity).
JointGramian empirical_joint(const sysmodel::LtvSystem& sys, const PerturbationScheme& scheme,
                             const JointOptions& options = {});

/// Sylvester solution of a W + W a = -b c.
Matrix analytic_cross(const Matrix& a, const Matrix& b, const Matrix& c);
/// a W + W a^T = -b b^T.
Matrix analytic_controllability(const Matrix& a, const Matrix& b);
/// a^T W + W a = -c^T c.
Matrix analytic_observability(const Matrix& a, const Matrix& c);

namespace reference {
/// Serial, entry-by-entry evaluation of the same sums. Slow; for tests and
/// the kernel benchmark.
Matrix empirical_cross(const sysmodel::LtvSystem& sys, const PerturbationScheme& scheme);
JointGramian empirical_joint(const sysmodel::LtvSystem& sys, const PerturbationScheme& scheme,
                             const JointOptions& options = {});
}  // namespace reference

}  // namespace gramion::gramian
