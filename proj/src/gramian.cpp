#include "gramion/gramian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gramion/error.hpp"
#include "gramion/numerics.hpp"

namespace gramion::gramian {

using sysmodel::InputSignal;
using sysmodel::LtvSystem;
using sysmodel::Trajectory;

namespace {

std::vector<std::size_t> resolve_directions(const std::vector<std::size_t>& dirs, std::size_t dim) {
    if (!dirs.empty()) return dirs;
    std::vector<std::size_t> all(dim);
    std::iota(all.begin(), all.end(), 0);
    return all;
}

void check_rotation(const Matrix& r, std::size_t dim, const char* what) {
    if (r.rows() != dim || r.cols() != dim)
        throw ValidationError(std::string(what) + " rotation must be " + std::to_string(dim) + "x" +
                              std::to_string(dim) + ", got " + r.shape());
    const Matrix gram = numerics::matmul_tn(r, r);
    if (max_abs_diff(gram, Matrix::identity(dim)) > 1e-12)
        throw ValidationError(std::string(what) + " rotation is not orthogonal within 1e-12");
}

void check_directions(const std::vector<std::size_t>& dirs, std::size_t dim, const char* what) {
    std::vector<bool> seen(dim, false);
    for (std::size_t d : dirs) {
        if (d >= dim)
            throw ValidationError(std::string(what) + " direction " + std::to_string(d) +
                                  " out of range (dimension " + std::to_string(dim) + ")");
        if (seen[d]) throw ValidationError(std::string(what) + " direction " + std::to_string(d) + " repeated");
        seen[d] = true;
    }
}

void check_scales(const std::vector<double>& scales, const char* what) {
    if (scales.empty()) throw ValidationError(std::string(what) + " scale set is empty");
    for (double s : scales)
        if (!(s > 0.0) || !std::isfinite(s))
            throw ValidationError(std::string(what) + " scales must be positive and finite");
}

// The system being perturbed. For the augmented case the state is (x, theta)
// and only x is integrated; theta enters through the step matrices.
struct Model {
    const LtvSystem* sys = nullptr;
    std::size_t state_dim = 0;
    bool augmented = false;
    std::vector<double> theta_scale;  // multiplies parameter components of a perturbation
    std::vector<double> theta_norm;   // divides parameter columns of the result
    bool excite = false;
    Matrix nominal_excited;           // y(0, theta, u_ref)
    InputSignal excitation;
};

struct Resolved {
    std::vector<std::size_t> in_dirs;
    std::vector<std::size_t> st_dirs;
    std::size_t n_in_rot = 1;
    std::size_t n_st_rot = 1;
};

Resolved resolve(const PerturbationScheme& scheme, std::size_t inputs, std::size_t states) {
    scheme.validate(inputs, states);
    Resolved r;
    r.in_dirs = resolve_directions(scheme.input_directions, inputs);
    r.st_dirs = resolve_directions(scheme.state_directions, states);
    r.n_in_rot = std::max<std::size_t>(1, scheme.input_rotations.size());
    r.n_st_rot = std::max<std::size_t>(1, scheme.state_rotations.size());
    return r;
}

const Matrix* rotation(const std::vector<Matrix>& set, std::size_t i) {
    return set.empty() ? nullptr : &set[i];
}

// Amplitude vector c * S e_j over the input channels.
std::vector<double> input_direction(const Matrix* rot, std::size_t j, double scale, std::size_t m) {
    std::vector<double> v(m, 0.0);
    if (rot == nullptr) {
        v[j] = scale;
    } else {
        for (std::size_t i = 0; i < m; ++i) v[i] = scale * (*rot)(i, j);
    }
    return v;
}

// State response to an input impulse, divided by the input scale.
Matrix input_response(const LtvSystem& sys, const std::vector<double>& amplitude, double scale) {
    const auto grid = sys.schedule.grid();
    InputSignal u = sysmodel::zero_input(sys.j_in, grid.steps);
    for (std::size_t j = 0; j < sys.j_in; ++j) u.samples(0, j) = amplitude[j] / grid.dt;
    const std::vector<double> zero(sys.n, 0.0);
    Trajectory t = sysmodel::simulate(sys, u, zero, true);
    Matrix x = std::move(*t.states);
    x *= 1.0 / scale;
    return x;
}

// d * Sigma * T f_a in the (possibly augmented) state space.
std::vector<double> state_perturbation(const Model& model, const Matrix* rot, std::size_t a,
                                       double scale) {
    std::vector<double> v(model.state_dim, 0.0);
    if (rot == nullptr) {
        v[a] = 1.0;
    } else {
        for (std::size_t i = 0; i < model.state_dim; ++i) v[i] = (*rot)(i, a);
    }
    const std::size_t n = model.sys->n;
    for (std::size_t i = 0; i < model.state_dim; ++i) {
        v[i] *= scale;
        if (i >= n) v[i] *= model.theta_scale[i - n];
    }
    return v;
}

// Output deviation from the steady state (or from the excited nominal
// trajectory when parameters move), divided by the state scale.
Matrix output_response(const Model& model, const std::vector<double>& pert, double scale) {
    const LtvSystem& sys = *model.sys;
    const std::size_t n = sys.n;
    const auto grid = sys.schedule.grid();
    const std::span<const double> x0(pert.data(), n);
    bool moves_theta = false;
    for (std::size_t i = n; i < pert.size(); ++i) moves_theta = moves_theta || pert[i] != 0.0;
    const bool moves_x = std::any_of(x0.begin(), x0.end(), [](double v) { return v != 0.0; });

    Matrix dy;
    if (!moves_theta) {
        if (!moves_x) return Matrix(grid.steps + 1, sys.o_out);
        // Linear in x: the excited nominal trajectory would cancel exactly.
        dy = sysmodel::simulate(sys, sysmodel::zero_input(sys.j_in, grid.steps), x0).outputs;
    } else {
        std::vector<double> theta(sys.theta);
        for (std::size_t k = 0; k < theta.size(); ++k) theta[k] += pert[n + k];
        const InputSignal u =
            model.excite ? model.excitation : sysmodel::zero_input(sys.j_in, grid.steps);
        dy = sysmodel::simulate_with_theta(sys, theta, u, x0).outputs;
        if (model.excite) dy -= model.nominal_excited;
    }
    dy *= 1.0 / scale;
    return dy;
}

void require_square_system(const LtvSystem& sys) {
    if (sys.j_in != sys.o_out)
        throw ValidationError("empirical cross gramian needs a square system, got " +
                              std::to_string(sys.j_in) + " inputs and " + std::to_string(sys.o_out) +
                              " outputs (use embed_symmetric)");
}

Model plain_model(const LtvSystem& sys) {
    sys.validate();
    require_square_system(sys);
    Model m;
    m.sys = &sys;
    m.state_dim = sys.n;
    return m;
}

Model augmented_model(const LtvSystem& embedded, const JointOptions& opt) {
    const std::size_t p = embedded.p();
    if (opt.param_scales.size() != 1 && opt.param_scales.size() != p)
        throw ValidationError("param_scales needs 1 or " + std::to_string(p) + " entries, got " +
                              std::to_string(opt.param_scales.size()));
    check_scales(opt.param_scales, "parameter");
    Model m;
    m.sys = &embedded;
    m.state_dim = embedded.n + p;
    m.augmented = true;
    m.excite = opt.excite;
    m.theta_scale.resize(p);
    m.theta_norm.resize(p);
    for (std::size_t k = 0; k < p; ++k) {
        const double ps = opt.param_scales.size() == 1 ? opt.param_scales[0] : opt.param_scales[k];
        m.theta_norm[k] = ps;
        m.theta_scale[k] =
            opt.mode == ParameterPerturbation::relative ? ps * std::abs(embedded.theta[k]) : ps;
    }
    if (m.excite) {
        const auto grid = embedded.schedule.grid();
        m.excitation = sysmodel::zero_input(embedded.j_in, grid.steps);
        for (std::size_t j = 0; j < embedded.j_in; ++j) m.excitation.samples(0, j) = 1.0 / grid.dt;
        const std::vector<double> zero(embedded.n, 0.0);
        m.nominal_excited = sysmodel::simulate(embedded, m.excitation, zero).outputs;
    }
    return m;
}

// Applies 1/(|Q_u||R_u||Q_x||R_x|) and the parameter-column normalization.
void finish(Matrix& w, const Model& model, const PerturbationScheme& scheme, const Resolved& r) {
    const double count = static_cast<double>(scheme.input_scales.size() * r.n_in_rot *
                                             scheme.state_scales.size() * r.n_st_rot);
    w *= 1.0 / count;
    if (!model.augmented) return;
    const std::size_t n = model.sys->n;
    for (std::size_t i = 0; i < w.rows(); ++i) {
        auto row = w.row(i);
        for (std::size_t k = 0; k < model.theta_norm.size(); ++k) row[n + k] /= model.theta_norm[k];
    }
}

// --- Optimized path --------------------------------------------------------
//
// Stack the weighted, input-rotated state responses of all input
// perturbations into G (n x m(K+1)), column t*m + j'. Each state perturbation
// then contributes the single column G * vec(dY) of its own, so the
// perturbation loop parallelizes without any shared accumulator.

Matrix stacked_input_responses(const LtvSystem& sys, const PerturbationScheme& scheme,
                               const Resolved& r) {
    const std::size_t n = sys.n;
    const std::size_t m = sys.j_in;
    const auto grid = sys.schedule.grid();
    const auto w = grid.trapezoid_weights();
    Matrix g(n, m * (grid.steps + 1));
    for (double c : scheme.input_scales) {
        for (std::size_t ri = 0; ri < r.n_in_rot; ++ri) {
            const Matrix* rot = rotation(scheme.input_rotations, ri);
            for (std::size_t j : r.in_dirs) {
                const Matrix x = input_response(sys, input_direction(rot, j, c, m), c);
                for (std::size_t t = 0; t <= grid.steps; ++t) {
                    const auto xt = x.row(t);
                    for (std::size_t jp = 0; jp < m; ++jp) {
                        const double f = w[t] * (rot == nullptr ? (jp == j ? 1.0 : 0.0) : (*rot)(jp, j));
                        if (f == 0.0) continue;
                        const std::size_t col = t * m + jp;
                        for (std::size_t a = 0; a < n; ++a) g(a, col) += f * xt[a];
                    }
                }
            }
        }
    }
    return g;
}

Matrix cross_parallel(const Model& model, const PerturbationScheme& scheme) {
    const LtvSystem& sys = *model.sys;
    const Resolved r = resolve(scheme, sys.j_in, model.state_dim);
    const Matrix g = stacked_input_responses(sys, scheme, r);
    const std::size_t n = sys.n;
    const std::size_t dim = model.state_dim;

    Matrix w(n, dim);
    for (double d : scheme.state_scales) {
        for (std::size_t li = 0; li < r.n_st_rot; ++li) {
            const Matrix* rot = rotation(scheme.state_rotations, li);
            Matrix zt(dim, n);  // row b = G vec(dY_b)
            const auto count = static_cast<std::ptrdiff_t>(r.st_dirs.size());
            std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
            for (std::ptrdiff_t idx = 0; idx < count; ++idx) {
                try {
                    const std::size_t b = r.st_dirs[static_cast<std::size_t>(idx)];
                    const Matrix dy = output_response(model, state_perturbation(model, rot, b, d), d);
                    const auto col = numerics::reference::matvec(g, dy.data());
                    std::copy(col.begin(), col.end(), zt.row(b).begin());
                } catch (...) {
#pragma omp critical(gramion_gramian_failure)
                    if (!failure) failure = std::current_exception();
                }
            }
            if (failure) std::rethrow_exception(failure);
            Matrix z = zt.transpose();
            if (rot != nullptr) z = numerics::matmul(z, rot->transpose());
            w += z;
        }
    }
    finish(w, model, scheme, r);
    return w;
}

// --- Reference path ---------------------------------------------------------

Matrix cross_serial(const Model& model, const PerturbationScheme& scheme) {
    const LtvSystem& sys = *model.sys;
    const Resolved r = resolve(scheme, sys.j_in, model.state_dim);
    const std::size_t n = sys.n;
    const std::size_t m = sys.j_in;
    const std::size_t dim = model.state_dim;
    const auto grid = sys.schedule.grid();
    const auto wt = grid.trapezoid_weights();

    // xs[h][i][j], ys[k][l][b]
    std::vector<std::vector<std::vector<Matrix>>> xs;
    for (double c : scheme.input_scales) {
        auto& per_scale = xs.emplace_back();
        for (std::size_t ri = 0; ri < r.n_in_rot; ++ri) {
            auto& per_rot = per_scale.emplace_back(m);
            const Matrix* rot = rotation(scheme.input_rotations, ri);
            for (std::size_t j : r.in_dirs)
                per_rot[j] = input_response(sys, input_direction(rot, j, c, m), c);
        }
    }
    std::vector<std::vector<std::vector<Matrix>>> ys;
    for (double d : scheme.state_scales) {
        auto& per_scale = ys.emplace_back();
        for (std::size_t li = 0; li < r.n_st_rot; ++li) {
            auto& per_rot = per_scale.emplace_back(dim);
            const Matrix* rot = rotation(scheme.state_rotations, li);
            for (std::size_t b : r.st_dirs)
                per_rot[b] = output_response(model, state_perturbation(model, rot, b, d), d);
        }
    }

    Matrix w(n, dim);
    for (std::size_t h = 0; h < xs.size(); ++h) {
        for (std::size_t ri = 0; ri < r.n_in_rot; ++ri) {
            const Matrix* srot = rotation(scheme.input_rotations, ri);
            for (std::size_t k = 0; k < ys.size(); ++k) {
                for (std::size_t li = 0; li < r.n_st_rot; ++li) {
                    const Matrix* trot = rotation(scheme.state_rotations, li);
                    Matrix mblock(n, dim);
                    for (std::size_t a = 0; a < n; ++a) {
                        for (std::size_t b : r.st_dirs) {
                            const Matrix& y = ys[k][li][b];
                            double acc = 0.0;
                            for (std::size_t t = 0; t <= grid.steps; ++t) {
                                double s = 0.0;
                                for (std::size_t j : r.in_dirs) {
                                    const double xa = xs[h][ri][j](t, a);
                                    if (srot == nullptr) {
                                        s += xa * y(t, j);
                                    } else {
                                        for (std::size_t jp = 0; jp < m; ++jp)
                                            s += xa * (*srot)(jp, j) * y(t, jp);
                                    }
                                }
                                acc += wt[t] * s;
                            }
                            mblock(a, b) = acc;
                        }
                    }
                    if (trot != nullptr) {
                        Matrix rotated(n, dim);
                        for (std::size_t a = 0; a < n; ++a)
                            for (std::size_t b = 0; b < dim; ++b) {
                                double s = 0.0;
                                for (std::size_t c = 0; c < dim; ++c) s += mblock(a, c) * (*trot)(b, c);
                                rotated(a, b) = s;
                            }
                        mblock = std::move(rotated);
                    }
                    w += mblock;
                }
            }
        }
    }
    finish(w, model, scheme, r);
    return w;
}

JointGramian split(const Matrix& w, std::size_t n) {
    return JointGramian{w.block(0, 0, n, n), w.block(0, n, n, w.cols() - n)};
}

template <class Kernel>
JointGramian joint_with(const LtvSystem& sys, const PerturbationScheme& scheme,
                        const JointOptions& options, Kernel kernel) {
    const LtvSystem embedded = sysmodel::embed_symmetric(sys);
    const Model model = augmented_model(embedded, options);
    return split(kernel(model, scheme), sys.n);
}

}  // namespace

void PerturbationScheme::validate(std::size_t inputs, std::size_t states) const {
    check_directions(input_directions, inputs, "input");
    check_directions(state_directions, states, "state");
    for (const Matrix& r : input_rotations) check_rotation(r, inputs, "input");
    for (const Matrix& r : state_rotations) check_rotation(r, states, "state");
    check_scales(input_scales, "input");
    check_scales(state_scales, "state");
}

Matrix empirical_cross(const LtvSystem& sys, const PerturbationScheme& scheme) {
    return cross_parallel(plain_model(sys), scheme);
}

JointGramian empirical_joint(const LtvSystem& sys, const PerturbationScheme& scheme,
                             const JointOptions& options) {
    return joint_with(sys, scheme, options, cross_parallel);
}

Matrix analytic_cross(const Matrix& a, const Matrix& b, const Matrix& c) {
    if (b.cols() != c.rows())
        throw ValidationError("analytic_cross needs a square system, got B " + b.shape() + " and C " +
                              c.shape());
    Matrix bc = numerics::matmul(b, c);
    bc *= -1.0;
    return numerics::solve_sylvester(a, a, bc);
}

Matrix analytic_controllability(const Matrix& a, const Matrix& b) {
    Matrix q = numerics::matmul(b, b.transpose());
    q *= -1.0;
    return numerics::solve_lyapunov(a, q);
}

Matrix analytic_observability(const Matrix& a, const Matrix& c) {
    Matrix q = numerics::matmul_tn(c, c);
    q *= -1.0;
    return numerics::solve_lyapunov(a.transpose(), q);
}

namespace reference {

Matrix empirical_cross(const LtvSystem& sys, const PerturbationScheme& scheme) {
    return cross_serial(plain_model(sys), scheme);
}

JointGramian empirical_joint(const LtvSystem& sys, const PerturbationScheme& scheme,
                             const JointOptions& options) {
    return joint_with(sys, scheme, options, cross_serial);
}

}  // namespace reference

}  // namespace gramion::gramian
