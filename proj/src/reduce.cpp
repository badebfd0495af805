#include "gramion/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gramion/error.hpp"
#include "gramion/hypnet.hpp"
#include "gramion/numerics.hpp"

namespace gramion::reduce {

using sysmodel::LtvSystem;

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

std::vector<double> multiply(const Matrix& m, std::span<const double> x) {
    return numerics::matvec(m, x);
}

std::vector<double> multiply_t(const Matrix& m, std::span<const double> x) {
    std::vector<double> y(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const auto row = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) y[j] += xi * row[j];
    }
    return y;
}

Matrix symmetric_part(const Matrix& m) {
    Matrix s = m + m.transpose();
    s *= 0.5;
    return s;
}

// Shell system carrying the full-space layout the reduced model reconstructs A in.
LtvSystem layout_of(const ReducedModel& model) {
    LtvSystem s;
    s.n = model.n();
    s.theta = model.theta_lifted;
    s.stabilization_shift = model.stabilization_shift;
    s.schedule = model.schedule;
    return s;
}

class DirectOperator final : public sysmodel::StepOperator {
public:
    explicit DirectOperator(const ReducedModel& model) : model_(model) {}

    const Matrix& at_step(std::size_t k) override {
        const double mid = model_.schedule.dt * (static_cast<double>(k) + 0.5);
        const std::size_t born = model_.schedule.born_by(mid);
        if (born != born_) {
            a_ = reduced_a_born(model_, born);
            born_ = born;
        }
        return a_;
    }

private:
    const ReducedModel& model_;
    std::size_t born_ = static_cast<std::size_t>(-1);
    Matrix a_;
};

// Node i joining adds theta_i e_i^T + e_i theta_i^T to A, where theta_i holds
// its couplings to the already present nodes j < i. In reduced coordinates
// that is v1[:, i] (u1^T theta_i)^T + (v1 theta_i) u1[i, :].
class IncrementalOperator final : public sysmodel::StepOperator {
public:
    explicit IncrementalOperator(const ReducedModel& model)
        : model_(model), a_(reduced_a_born(model, 0)), g_(model.r()), h_(model.r()) {}

    const Matrix& at_step(std::size_t k) override {
        const double mid = model_.schedule.dt * (static_cast<double>(k) + 0.5);
        const std::size_t born = model_.schedule.born_by(mid);
        for (; born_ < born; ++born_) add_node(born_);
        return a_;
    }

private:
    void add_node(std::size_t i) {
        const std::size_t n = model_.n();
        const std::size_t r = model_.r();
        const auto& theta = model_.theta_lifted;
        std::fill(g_.begin(), g_.end(), 0.0);
        std::fill(h_.begin(), h_.end(), 0.0);
        for (std::size_t j = 0; j < i; ++j) {
            const double t = theta[hypnet::parameter_index(j, i, n)];
            if (t == 0.0) continue;
            const auto urow = model_.u1.row(j);
            for (std::size_t a = 0; a < r; ++a) {
                g_[a] += t * urow[a];
                h_[a] += t * model_.v1(a, j);
            }
        }
        const auto ui = model_.u1.row(i);
        for (std::size_t a = 0; a < r; ++a) {
            auto row = a_.row(a);
            const double vi = model_.v1(a, i);
            const double ha = h_[a];
            for (std::size_t b = 0; b < r; ++b) row[b] += vi * g_[b] + ha * ui[b];
        }
    }

    const ReducedModel& model_;
    std::size_t born_ = 0;
    Matrix a_;
    std::vector<double> g_;
    std::vector<double> h_;
};

}  // namespace

StateProjection state_projection(const Matrix& wx, std::size_t r) {
    require(wx.square(), "state_projection needs a square gramian, got " + wx.shape());
    require(r >= 1 && r <= wx.rows(), "state order " + std::to_string(r) + " outside [1, " +
                                          std::to_string(wx.rows()) + "]");
    const numerics::SvdResult f = numerics::svd(wx);
    Matrix u1 = f.u.block(0, 0, wx.rows(), r);
    const Matrix vt1 = f.vt.block(0, 0, r, wx.cols());
    Matrix core = numerics::matmul(vt1, u1);
    Matrix v1;
    try {
        v1 = numerics::solve_linear(core, vt1);
    } catch (const NumericalError& e) {
        throw NumericalError("state_projection: leading singular subspaces are not bi-orthogonalizable at r = " +
                             std::to_string(r) + " (" + e.what() + ")");
    }
    return {std::move(v1), std::move(u1), f.s};
}

Matrix cross_identifiability(const gramian::JointGramian& wj, double regularization) {
    const std::size_t n = wj.wx.rows();
    require(wj.wx.square(), "joint gramian W_X must be square, got " + wj.wx.shape());
    require(wj.wm.rows() == n, "joint gramian W_M must have " + std::to_string(n) + " rows, got " +
                                   wj.wm.shape());
    require(regularization >= 0.0 && std::isfinite(regularization),
            "regularization must be finite and nonnegative");
    Matrix s = symmetric_part(wj.wx);
    const double eps = regularization * std::abs(s.trace()) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) s(i, i) += eps;
    Matrix x;
    try {
        x = numerics::solve_linear(s, wj.wm);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("cross_identifiability: symmetric part of W_X is singular (") +
                             e.what() + "); increase the regularization factor (currently " +
                             std::to_string(regularization) + ")");
    }
    Matrix wi = numerics::matmul_tn(wj.wm, x);
    return symmetric_part(wi);
}

ParameterProjection parameter_projection(const Matrix& wi, std::size_t q) {
    require(wi.square(), "parameter_projection needs a square matrix, got " + wi.shape());
    require(q >= 1 && q <= wi.rows(), "parameter order " + std::to_string(q) + " outside [1, " +
                                          std::to_string(wi.rows()) + "]");
    numerics::SvdResult f = numerics::svd_symmetric(symmetric_part(wi));
    return {f.vt.block(0, 0, q, wi.cols()), std::move(f.s)};
}

OrderStrategy parse_strategy(const std::string& name) {
    if (name == "knee") return OrderStrategy::knee;
    if (name == "energy") return OrderStrategy::energy;
    if (name == "fixed") return OrderStrategy::fixed;
    throw ValidationError("unknown order strategy '" + name + "' (expected knee, energy or fixed)");
}

const char* strategy_name(OrderStrategy s) {
    switch (s) {
        case OrderStrategy::knee: return "knee";
        case OrderStrategy::energy: return "energy";
        case OrderStrategy::fixed: return "fixed";
    }
    return "?";
}

std::size_t choose_order(std::span<const double> sv, const OrderRule& rule) {
    require(!sv.empty(), "choose_order needs a nonempty spectrum");
    const std::size_t len = sv.size();
    switch (rule.strategy) {
        case OrderStrategy::knee: {
            if (sv[0] <= 0.0) return 1;
            for (std::size_t r = 1; r < len; ++r)
                if (sv[r] / sv[0] < rule.knee_tolerance) return r;
            return len;
        }
        case OrderStrategy::energy: {
            double total = 0.0;
            for (double s : sv) total += s;
            if (total <= 0.0) return 1;
            double acc = 0.0;
            for (std::size_t r = 0; r < len; ++r) {
                acc += sv[r];
                if (acc >= rule.energy_fraction * total) return r + 1;
            }
            return len;
        }
        case OrderStrategy::fixed:
            require(rule.fixed_order >= 1 && rule.fixed_order <= len,
                    "fixed order " + std::to_string(rule.fixed_order) + " outside [1, " +
                        std::to_string(len) + "]");
            return rule.fixed_order;
    }
    return len;
}

void ReducedModel::validate() const {
    const std::size_t nn = n();
    const std::size_t rr = r();
    require(v1.rows() == rr && v1.cols() == nn,
            "v1 must be " + std::to_string(rr) + "x" + std::to_string(nn) + ", got " + v1.shape());
    require(rr >= 1 && rr <= nn, "reduced state order must lie in [1, n]");
    require(q() >= 1 && q() <= p(), "reduced parameter order must lie in [1, p]");
    require(p() == hypnet::parameter_count(nn), "pv1 must have n(n-1)/2 columns");
    require(b_red.rows() == rr, "b_red must have r rows");
    require(c_red.cols() == rr, "c_red must have r columns");
    require(x0_red.size() == rr, "x0_red must have length r");
    require(theta_reduced.size() == q(), "theta_reduced must have length q");
    require(theta_lifted.size() == p(), "theta_lifted must have length p");
    require(stabilization_shift.size() == nn, "stabilization shift must have length n");
    schedule.validate(nn);
}

ReducedModel build_reduced(const LtvSystem& sys, const Matrix& v1, const Matrix& u1, const Matrix& pv1) {
    sys.validate();
    require(v1.cols() == sys.n && u1.rows() == sys.n && v1.rows() == u1.cols(),
            "state projections do not conform: v1 " + v1.shape() + ", u1 " + u1.shape() + ", n = " +
                std::to_string(sys.n));
    require(pv1.cols() == sys.p(), "parameter projection must have " + std::to_string(sys.p()) +
                                       " columns, got " + pv1.shape());
    ReducedModel m;
    m.v1 = v1;
    m.u1 = u1;
    m.pv1 = pv1;
    m.b_red = numerics::matmul(v1, sys.b);
    m.c_red = numerics::matmul(sys.c, u1);
    m.x0_red = multiply(v1, sys.x0);
    m.theta_reduced = multiply(pv1, sys.theta);
    m.theta_lifted = multiply_t(pv1, m.theta_reduced);
    m.stabilization_shift = sys.stabilization_shift;
    m.schedule = sys.schedule;
    m.validate();
    return m;
}

Matrix reduced_a_born(const ReducedModel& model, std::size_t born) {
    const LtvSystem layout = layout_of(model);
    const Matrix a = sysmodel::assemble_a_born(layout, model.theta_lifted, born);
    return numerics::matmul(numerics::matmul(model.v1, a), model.u1);
}

sysmodel::Trajectory simulate(const ReducedModel& model, const sysmodel::InputSignal& u, ReducedPath path) {
    const auto grid = model.schedule.grid();
    if (path == ReducedPath::direct) {
        DirectOperator op(model);
        return sysmodel::integrate(op, model.b_red, model.c_red, u, model.x0_red, grid, false);
    }
    IncrementalOperator op(model);
    return sysmodel::integrate(op, model.b_red, model.c_red, u, model.x0_red, grid, false);
}

Reduction reduce_combined(const LtvSystem& sys, const gramian::JointGramian& wj, const OrderRule& states,
                          const OrderRule& params, double regularization) {
    require(wj.n() == sys.n && wj.p() == sys.p(), "joint gramian does not match the system");
    const Matrix wi = cross_identifiability(wj, regularization);
    const numerics::SvdResult pf = numerics::svd_symmetric(wi);
    const numerics::SvdResult sf = numerics::svd(wj.wx);
    const std::size_t r = choose_order(sf.s, states);
    const std::size_t q = choose_order(pf.s, params);

    StateProjection sp = state_projection(wj.wx, r);
    const Matrix pv1 = pf.vt.block(0, 0, q, sys.p());
    Reduction out{build_reduced(sys, sp.v1, sp.u1, pv1), sf.s, pf.s, 0};
    out.knee_order = choose_order(pf.s, OrderRule{});
    return out;
}

GaussianParameters reduce_parameter_distribution(std::span<const double> mean, const Matrix& covariance,
                                                 const Matrix& pv1) {
    const std::size_t p = pv1.cols();
    require(mean.size() == p, "mean has length " + std::to_string(mean.size()) + ", expected " +
                                  std::to_string(p));
    require(covariance.rows() == p && covariance.cols() == p,
            "covariance must be " + std::to_string(p) + "x" + std::to_string(p) + ", got " +
                covariance.shape());
    const double scale = covariance.max_abs();
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < i; ++j)
            require(std::abs(covariance(i, j) - covariance(j, i)) <= 1e-10 * scale,
                    "covariance is not symmetric");
    GaussianParameters g;
    g.mean = multiply(pv1, mean);
    g.covariance = symmetric_part(numerics::matmul(numerics::matmul(pv1, covariance), pv1.transpose()));
    return g;
}

std::size_t stored_floats(const ReducedModel& m) {
    return m.v1.size() + m.u1.size() + m.b_red.size() + m.c_red.size() + m.x0_red.size() +
           m.theta_lifted.size() + m.stabilization_shift.size();
}

std::size_t stored_floats(const LtvSystem& sys) {
    return sys.theta.size() + sys.b.size() + sys.c.size() + sys.x0.size() +
           sys.stabilization_shift.size();
}

}  // namespace gramion::reduce
