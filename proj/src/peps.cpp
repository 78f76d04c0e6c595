#include "tengraph/peps.hpp"

#include <cmath>
#include <string>

namespace tengraph {

namespace {

struct Cores {
    DenseTensor a, b;
};

Cores project_cores(const DenseTensor& stg, const DenseTensor& ttg, const Matrix& u, const Matrix& v) {
    const Matrix ut = u.transpose(), vt = v.transpose();
    return {mode_n_product(mode_n_product(mode_n_product(stg, ut, 0), ut, 1), vt, 2),
            mode_n_product(mode_n_product(mode_n_product(ttg, vt, 0), vt, 1), ut, 2)};
}

DenseTensor expand(const DenseTensor& core, const Matrix& f01, const Matrix& f2) {
    return mode_n_product(mode_n_product(mode_n_product(core, f01, 0), f01, 1), f2, 2);
}

double squared_residual(const DenseTensor& x, const DenseTensor& approx) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x.data()[i] - approx.data()[i];
        s += d * d;
    }
    return s;
}

double objective(const DenseTensor& stg, const DenseTensor& ttg, const Matrix& u, const Matrix& v) {
    const Cores c = project_cores(stg, ttg, u, v);
    return squared_residual(stg, expand(c.a, u, v)) + squared_residual(ttg, expand(c.b, v, u));
}

Matrix hcat(std::initializer_list<Matrix> blocks) {
    Eigen::Index rows = blocks.begin()->rows(), cols = 0;
    for (const auto& b : blocks) cols += b.cols();
    Matrix m(rows, cols);
    Eigen::Index at = 0;
    for (const auto& b : blocks) {
        m.middleCols(at, b.cols()) = b;
        at += b.cols();
    }
    return m;
}

// Orthonormal factor closest to g in Frobenius norm.
Matrix polar(const Matrix& g) {
    const SvdResult f = svd(g);
    return f.u * f.v.transpose();
}

// Environment of the node factor: every unfolding in which U contracts,
// with all other factors applied. J decreases as ||U^T M||_F grows.
Matrix node_environment(const DenseTensor& stg, const DenseTensor& ttg, const Matrix& u, const Matrix& v) {
    const Matrix ut = u.transpose(), vt = v.transpose();
    return hcat({unfold(mode_n_product(mode_n_product(stg, ut, 1), vt, 2), 0),
                 unfold(mode_n_product(mode_n_product(stg, ut, 0), vt, 2), 1),
                 unfold(mode_n_product(mode_n_product(ttg, vt, 0), vt, 1), 2)});
}

Matrix time_environment(const DenseTensor& stg, const DenseTensor& ttg, const Matrix& u, const Matrix& v) {
    const Matrix ut = u.transpose(), vt = v.transpose();
    return hcat({unfold(mode_n_product(mode_n_product(stg, ut, 0), ut, 1), 2),
                 unfold(mode_n_product(mode_n_product(ttg, vt, 1), ut, 2), 0),
                 unfold(mode_n_product(mode_n_product(ttg, vt, 0), ut, 2), 1)});
}

// Tries the subspace-iteration candidate, then the polar retraction of the
// gradient; keeps `current` if neither lowers J.
template <class Eval>
void update_factor(Matrix& current, double& j, const Matrix& env, Eval&& eval) {
    const auto rank = static_cast<std::size_t>(current.cols());
    Matrix cand = leading_left_singular_vectors(env, rank);
    double jc = eval(cand);
    if (jc <= j) {
        current = std::move(cand);
        j = jc;
        return;
    }
    cand = polar(env * (env.transpose() * current));
    jc = eval(cand);
    if (jc <= j) {
        current = std::move(cand);
        j = jc;
    }
}

}  // namespace

std::size_t PepsPair::parameter_count() const {
    const std::size_t n = node_factor.rows(), t = time_factor.rows();
    const std::size_t rn = rank_nodes(), rt = rank_time();
    return n * rn + t * rt + rn * rn * rt + rt * rt * rn;
}

PepsOptions default_peps_options(std::size_t nodes, std::size_t steps) {
    PepsOptions o;
    o.rank_nodes = (nodes + 3) / 4;
    o.rank_time = (steps + 1) / 2;
    return o;
}

PepsPair peps_fit(const DenseTensor& stg, const DenseTensor& ttg, const PepsOptions& opt) {
    if (stg.rank() != 3 || stg.extent(0) != stg.extent(1)) throw ShapeError("peps_fit: STG must be N x N x T");
    const std::size_t n = stg.extent(0), t = stg.extent(2);
    if (ttg.shape() != Shape{t, t, n}) {
        throw ShapeError("peps_fit: TTG must be T x T x N = " + std::to_string(t) + "x" + std::to_string(t) + "x" +
                         std::to_string(n));
    }
    if (opt.rank_nodes < 1 || opt.rank_nodes > n) {
        throw ShapeError("peps_fit: node rank " + std::to_string(opt.rank_nodes) + " exceeds N = " + std::to_string(n));
    }
    if (opt.rank_time < 1 || opt.rank_time > t) {
        throw ShapeError("peps_fit: time rank " + std::to_string(opt.rank_time) + " exceeds T = " + std::to_string(t));
    }
    if (opt.max_sweeps < 1) throw ConfigError("peps_fit: max_sweeps must be at least 1");
    if (!(opt.tol > 0.0)) throw ConfigError("peps_fit: tol must be positive");
    if (!stg.all_finite() || !ttg.all_finite()) throw NumericalError("peps_fit: non-finite graph entries");

    Matrix u = leading_left_singular_vectors(hcat({unfold(stg, 0), unfold(stg, 1)}), opt.rank_nodes);
    Matrix v = leading_left_singular_vectors(hcat({unfold(ttg, 0), unfold(ttg, 1)}), opt.rank_time);

    PepsPair p;
    double j = objective(stg, ttg, u, v);
    p.history.push_back(j);
    for (std::size_t sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        const double before = j;
        update_factor(u, j, node_environment(stg, ttg, u, v),
                      [&](const Matrix& cand) { return objective(stg, ttg, cand, v); });
        update_factor(v, j, time_environment(stg, ttg, u, v),
                      [&](const Matrix& cand) { return objective(stg, ttg, u, cand); });
        p.history.push_back(j);
        p.sweeps = sweep;
        if (before <= 0.0 || (before - j) / before < opt.tol) break;
    }
    Cores c = project_cores(stg, ttg, u, v);
    p.node_factor = std::move(u);
    p.time_factor = std::move(v);
    p.core_a = std::move(c.a);
    p.core_b = std::move(c.b);
    p.joint_error = j;
    return p;
}

PepsPair peps_fit(const SpatialTensorGraph& a, const TemporalTensorGraph& b, const PepsOptions& opt) {
    return peps_fit(a.weights, b.weights, opt);
}

std::pair<DenseTensor, DenseTensor> peps_reconstruct(const PepsPair& p) {
    if (p.core_a.shape() != Shape{p.rank_nodes(), p.rank_nodes(), p.rank_time()} ||
        p.core_b.shape() != Shape{p.rank_time(), p.rank_time(), p.rank_nodes()}) {
        throw ShapeError("peps_reconstruct: core extents do not match the factor ranks");
    }
    return {expand(p.core_a, p.node_factor, p.time_factor), expand(p.core_b, p.time_factor, p.node_factor)};
}

double peps_joint_error(const DenseTensor& stg, const DenseTensor& ttg, const Matrix& node_factor,
                        const Matrix& time_factor) {
    return objective(stg, ttg, node_factor, time_factor);
}

double compression_ratio(const PepsPair& p, std::size_t nodes, std::size_t steps) {
    const double full = static_cast<double>(nodes * nodes * steps + steps * steps * nodes);
    return full / static_cast<double>(p.parameter_count());
}

}  // namespace tengraph
