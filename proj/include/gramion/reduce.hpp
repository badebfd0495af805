#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gramion/gramian.hpp"
#include "gramion/matrix.hpp"
#include "gramion/sysmodel.hpp"

namespace gramion::reduce {

struct StateProjection {
    Matrix v1;  ///< r x n
    Matrix u1;  ///< n x r
    std::vector<double> singular_values;
};

/// Direct truncation of W_X = U D V^T. u1 holds the leading r left singular
/// vectors and v1 = (V_1^T U_1)^{-1} V_1^T, the leading right singular
/// vectors made bi-orthogonal to u1 (v1 u1 = I_r). For symmetric W_X this is
/// V_1^T itself up to signs; at r = n it is U^T.
StateProjection state_projection(const Matrix& wx, std::size_t r);

/// W_M^T (sym(W_X) + eps I)^{-1} W_M with eps = regularization * trace(sym(W_X)) / n,
/// symmetrized after assembly.
Matrix cross_identifiability(const gramian::JointGramian& wj, double regularization = 1e-12);

struct ParameterProjection {
    Matrix pv1;  ///< q x p, orthonormal rows
    std::vector<double> singular_values;
};

ParameterProjection parameter_projection(const Matrix& wi, std::size_t q);

enum class OrderStrategy { knee, energy, fixed };

struct OrderRule {
    OrderStrategy strategy = OrderStrategy::knee;
    double knee_tolerance = 1e-8;
    double energy_fraction = 0.9999;
    std::size_t fixed_order = 0;
};

OrderStrategy parse_strategy(const std::string& name);
const char* strategy_name(OrderStrategy s);

/// knee: smallest r with s[r] / s[0] < tolerance (all of them if none drops);
/// energy: smallest r whose leading sum reaches the fraction of the total;
/// fixed: the configured order, which must lie in [1, size].
std::size_t choose_order(std::span<const double> singular_values, const OrderRule& rule);

/// Reduced LTV model. The reduced state matrix at time t is
/// v1 A(pv1^T pv1 theta, t) u1, with A reconstructed in the full node space so
/// edge activation follows the full network's schedule.
struct ReducedModel {
    Matrix v1;
    Matrix u1;
    Matrix pv1;
    Matrix b_red;
    Matrix c_red;
    std::vector<double> x0_red;
    std::vector<double> theta_reduced;  ///< pv1 theta
    std::vector<double> theta_lifted;   ///< pv1^T pv1 theta
    std::vector<double> stabilization_shift;
    sysmodel::ActivationSchedule schedule;

    [[nodiscard]] std::size_t n() const { return u1.rows(); }
    [[nodiscard]] std::size_t r() const { return u1.cols(); }
    [[nodiscard]] std::size_t p() const { return pv1.cols(); }
    [[nodiscard]] std::size_t q() const { return pv1.rows(); }
    void validate() const;
};

ReducedModel build_reduced(const sysmodel::LtvSystem& sys, const Matrix& v1, const Matrix& u1,
                           const Matrix& pv1);

/// Reduced state matrix with the first `born` nodes active (direct evaluation).
Matrix reduced_a_born(const ReducedModel& model, std::size_t born);

enum class ReducedPath {
    /// Reduced A updated by a rank-two correction per node birth.
    incremental,
    /// Reduced A recomputed as v1 A u1 whenever the born set changes.
    direct,
};

sysmodel::Trajectory simulate(const ReducedModel& model, const sysmodel::InputSignal& u,
                              ReducedPath path = ReducedPath::incremental);

struct Reduction {
    ReducedModel model;
    std::vector<double> state_singular_values;
    std::vector<double> parameter_singular_values;
    std::size_t knee_order = 0;  ///< knee of the parameter spectrum at the default tolerance
};

/// Combined state and parameter reduction from a joint gramian.
Reduction reduce_combined(const sysmodel::LtvSystem& sys, const gramian::JointGramian& wj,
                          const OrderRule& states, const OrderRule& params,
                          double regularization = 1e-12);

struct GaussianParameters {
    std::vector<double> mean;
    Matrix covariance;
};

/// (pv1 mean, pv1 covariance pv1^T).
GaussianParameters reduce_parameter_distribution(std::span<const double> mean,
                                                 const Matrix& covariance, const Matrix& pv1);

/// Floats the online phase reads: projections, reduced input/output maps,
/// reduced initial state, lifted parameters, and the diagonal shift.
std::size_t stored_floats(const ReducedModel& model);
/// theta, B, C, x0, and the diagonal shift.
std::size_t stored_floats(const sysmodel::LtvSystem& sys);

}  // namespace gramion::reduce
