#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseQR>
#include <Eigen/SparseCholesky>

#include "convexiwave/errors.hpp"
#include "convexiwave/grid.hpp"

namespace convexiwave::lsq {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Sparse matrix of a 1D stencil.
inline SparseMatrix stencil_matrix(const Stencil1D& s) {
    const auto n = static_cast<Eigen::Index>(s.nodes());
    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t k = 0; k < s.nodes(); ++k) {
        const auto& r = s.row(k);
        for (std::size_t m = 0; m < r.count; ++m)
            trips.emplace_back(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r.start + m), r.coef[m]);
    }
    SparseMatrix out(n, n);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

inline SparseMatrix identity(Eigen::Index n) {
    SparseMatrix out(n, n);
    out.setIdentity();
    return out;
}

/// Kronecker product; with row-major (x, t) node layout, kron(X, I_t) acts along x.
inline SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
    for (int ka = 0; ka < a.outerSize(); ++ka)
        for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia)
            for (int kb = 0; kb < b.outerSize(); ++kb)
                for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib)
                    trips.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                                       ia.value() * ib.value());
    SparseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

/// Whole-grid sparse difference operators, consistent with Derivatives.
struct GridOperators {
    SparseMatrix id, dx, dt, dxx, dtt, dxt;

    explicit GridOperators(const Derivatives& d) {
        const auto& g = d.grid();
        const auto ix = identity(static_cast<Eigen::Index>(g.x_nodes()));
        const auto it = identity(static_cast<Eigen::Index>(g.t_nodes()));
        id = identity(static_cast<Eigen::Index>(g.size()));
        dx = kron(stencil_matrix(d.x1()), it);
        dt = kron(ix, stencil_matrix(d.t1()));
        dxx = kron(stencil_matrix(d.x2()), it);
        dtt = kron(ix, stencil_matrix(d.t2()));
        dxt = kron(stencil_matrix(d.x1()), stencil_matrix(d.t1()));
    }
};

/// Selects the nodes of x-row i: (x_i, t_j) for every j.
inline SparseMatrix row_selector(const SpaceTimeGrid& g, std::size_t i) {
    const auto nt = static_cast<Eigen::Index>(g.t_nodes());
    SparseMatrix out(nt, static_cast<Eigen::Index>(g.size()));
    std::vector<Eigen::Triplet<double>> trips;
    for (Eigen::Index j = 0; j < nt; ++j) trips.emplace_back(j, static_cast<Eigen::Index>(i) * nt + j, 1.0);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

inline Vector to_vector(std::span<const double> v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

enum class Method {
    /// LDL^T of the normal equations accumulated in extended precision. The
    /// H^2 term with a tiny weight is the only thing pinning components the data
    /// cannot reach, and in double those pivots drown in rounding.
    ExtendedNormalEquations,
    /// LDL^T of the normal equations in double.
    NormalEquations,
    /// Householder QR of the stacked weighted rows. Slow; meant for small checks.
    SparseQR,
};

namespace detail {

template <typename Scalar>
Vector solve_normal(const SparseMatrix& a, const Vector& rhs) {
    using Sparse = Eigen::SparseMatrix<Scalar>;
    using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Sparse as = a.template cast<Scalar>();
    const Sparse at = as.transpose();
    const Sparse normal = at * as;
    Eigen::SimplicialLDLT<Sparse> ldlt;
    ldlt.compute(normal);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::SingularSystem, "normal equations could not be factored");
    const Dense d = ldlt.vectorD();
    if ((d.array() <= Scalar(0)).any() || !d.allFinite())
        throw Error(ErrorKind::SingularSystem, "normal equations are not positive definite");
    const Dense x = ldlt.solve(Dense(at * rhs.cast<Scalar>()));
    return x.template cast<double>();
}

}  // namespace detail

/// Quadratic functional sum_k || sqrt(w_k) (A_k x - b_k) ||^2 accumulated as
/// stacked weighted rows and minimized by a direct sparse factorization.
class LeastSquares {
public:
    explicit LeastSquares(Eigen::Index unknowns) : cols_(unknowns) {}

    void add(const SparseMatrix& a, const Vector& weights, const Vector& target) {
        require(a.cols() == cols_, "least-squares block has wrong column count");
        require(a.rows() == weights.size() && a.rows() == target.size(), "least-squares block size mismatch");
        require((weights.array() >= 0.0).all(), "least-squares weights must be nonnegative");
        const Vector root = weights.cwiseSqrt();
        for (int k = 0; k < a.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(a, k); it; ++it)
                if (it.value() != 0.0)
                    trips_.emplace_back(rows_ + it.row(), it.col(), root(it.row()) * it.value());
        rhs_.conservativeResize(rows_ + a.rows());
        rhs_.segment(rows_, a.rows()) = root.cwiseProduct(target);
        rows_ += a.rows();
    }

    void add(const SparseMatrix& a, const Vector& weights) { add(a, weights, Vector::Zero(a.rows())); }

    /// scale * (discrete H^2 norm squared), with trapezoidal weights.
    void add_h2(const GridOperators& ops, const Vector& quad_weights, double scale) {
        const Vector w = scale * quad_weights;
        for (const SparseMatrix* m : {&ops.id, &ops.dx, &ops.dt, &ops.dxx, &ops.dxt, &ops.dtt}) add(*m, w);
    }

    SparseMatrix stacked() const {
        SparseMatrix a(rows_, cols_);
        a.setFromTriplets(trips_.begin(), trips_.end());
        a.makeCompressed();
        return a;
    }
    const Vector& stacked_rhs() const { return rhs_; }

    Vector solve(Method method = Method::ExtendedNormalEquations) const {
        const SparseMatrix a = stacked();
        Vector x;
        switch (method) {
            case Method::ExtendedNormalEquations: x = detail::solve_normal<long double>(a, rhs_); break;
            case Method::NormalEquations: x = detail::solve_normal<double>(a, rhs_); break;
            case Method::SparseQR: {
                Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr;
                qr.setPivotThreshold(0.0);
                qr.compute(a);
                if (qr.info() != Eigen::Success || qr.rank() < cols_)
                    throw Error(ErrorKind::SingularSystem, "sparse QR factorization failed or is rank deficient");
                x = qr.solve(rhs_);
                break;
            }
        }
        if (!x.allFinite()) throw Error(ErrorKind::SingularSystem, "least-squares solution is not finite");
        return x;
    }

    /// ||A^T (A x - b)|| / ||A^T b||: relative residual of the normal equations.
    double relative_residual(const Vector& x) const {
        const SparseMatrix a = stacked();
        const Vector r = a.transpose() * (a * x - rhs_);
        const double denom = (a.transpose() * rhs_).norm();
        return r.norm() / (denom > 0.0 ? denom : 1.0);
    }

private:
    Eigen::Index cols_;
    Eigen::Index rows_ = 0;
    std::vector<Eigen::Triplet<double>> trips_;
    Vector rhs_;
};

inline Vector quadrature_vector(const SpaceTimeGrid& g) {
    const Field2D w = quadrature_weights(g);
    return to_vector(w.values());
}

inline Vector time_weights(const SpaceTimeGrid& g) {
    const auto wt = trapezoid_weights(g.nt(), g.dt());
    return to_vector(wt);
}

}  // namespace convexiwave::lsq
