#pragma once

// Restarted Lanczos for Hermitian operators with full reorthogonalization.
// Works on both real-symmetric and complex-Hermitian matvecs; supports
// deflation against already-converged eigenvectors so higher states of a
// quasi-degenerate cluster can be extracted one at a time.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluxlab {

struct LanczosSettings {
    double tol = 1e-12;        // on the true residual ||Hx - theta x||
    int max_matvecs = 2000;    // total budget across restarts
    int krylov_budget = 64;    // basis size per restart cycle
    bool throw_on_fail = true; // false: return the best pair, converged=false
};

template <typename Scalar>
struct LanczosResult {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    double value = 0.0;
    Vector vector;
    double residual = 0.0;
    int matvecs = 0;
    bool converged = false;
};

namespace detail {

template <typename Scalar>
double real_dot(const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& a,
                const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& b) {
    if constexpr (std::is_same_v<Scalar, double>)
        return a.dot(b);
    else
        return a.dot(b).real();
}

}  // namespace detail

/// Lowest eigenpair of a Hermitian operator given as a matvec closure.
/// `start` must be nonzero; components along `deflate` vectors are projected
/// out of every Krylov vector. Throws if the budget is exhausted without
/// reaching `tol`.
template <typename Scalar>
LanczosResult<Scalar> lowest_eigenpair(
    const std::function<void(const Scalar*, Scalar*)>& matvec, std::int64_t dim,
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> start,
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& deflate,
    const LanczosSettings& opt) {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (dim <= 0) throw std::invalid_argument("lanczos: empty space");

    auto project_deflated = [&](Vector& v) {
        for (const auto& u : deflate) v -= u * u.dot(v);
    };

    project_deflated(start);
    double nrm = start.norm();
    if (nrm < 1e-14) throw std::runtime_error("lanczos: start vector lies in deflated span");
    start /= nrm;

    const int m_max = static_cast<int>(std::min<std::int64_t>(opt.krylov_budget, dim));
    LanczosResult<Scalar> out;
    out.vector = start;

    Matrix basis(dim, m_max);
    Vector w(dim), hx(dim);
    std::vector<double> alpha, beta;

    while (out.matvecs < opt.max_matvecs) {
        alpha.clear();
        beta.clear();
        basis.col(0) = out.vector;

        bool restarted = false;
        for (int k = 0; k < m_max && out.matvecs < opt.max_matvecs; ++k) {
            matvec(basis.col(k).data(), w.data());
            ++out.matvecs;
            alpha.push_back(detail::real_dot<Scalar>(basis.col(k), w));
            w -= alpha[k] * basis.col(k);
            if (k > 0) w -= beta[k - 1] * basis.col(k - 1);

            // full reorthogonalization; second pass only on significant
            // norm loss (Kahan--Parlett criterion)
            const auto blk = basis.leftCols(k + 1);
            double pre = w.norm();
            project_deflated(w);
            w -= blk * (blk.adjoint() * w).eval();
            if (w.norm() < 0.7 * pre) {
                project_deflated(w);
                w -= blk * (blk.adjoint() * w).eval();
            }
            const double bnorm = w.norm();

            const int n = static_cast<int>(alpha.size());
            Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(n, n);
            for (int i = 0; i < n; ++i) {
                tri(i, i) = alpha[i];
                if (i + 1 < n) tri(i, i + 1) = tri(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
            const double theta = es.eigenvalues()(0);
            const Eigen::VectorXd s = es.eigenvectors().col(0);
            const double est = bnorm * std::abs(s(n - 1));

            const bool breakdown = bnorm < 1e-13 * std::max(1.0, std::abs(theta));
            if (est <= 0.5 * opt.tol || breakdown || k == m_max - 1 ||
                out.matvecs >= opt.max_matvecs - 1) {
                Vector x = blk * s.cast<Scalar>();
                project_deflated(x);
                x.normalize();
                matvec(x.data(), hx.data());
                ++out.matvecs;
                const double ritz = detail::real_dot<Scalar>(x, hx);
                const double res = (hx - ritz * x).norm();
                out.value = ritz;
                out.vector = x;
                out.residual = res;
                if (res <= opt.tol || (breakdown && res <= 100 * opt.tol)) {
                    out.converged = true;
                    return out;
                }
                restarted = true;
                break;
            }

            beta.push_back(bnorm);
            basis.col(k + 1) = w / bnorm;
        }
        if (!restarted) break;
    }
    if (opt.throw_on_fail)
        throw std::runtime_error("lanczos: not converged within matvec budget (residual " +
                                 std::to_string(out.residual) + ")");
    return out;
}

}  // namespace fluxlab
