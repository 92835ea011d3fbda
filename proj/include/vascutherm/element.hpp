#pragma once

// P1 triangle and line-segment kernels. Templated on the scalar so the same
// code serves double assembly and higher-precision cross-checks.

#include "vascutherm/error.hpp"

#include <Eigen/Core>

#include <cmath>
#include <utility>

namespace vascutherm::element {

template <typename Scalar> using Coords = Eigen::Matrix<Scalar, 2, 3>;
template <typename Scalar> using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

template <typename Scalar> Scalar signed_area(const Coords<Scalar>& xy)
{
    const Scalar ax = xy(0, 1) - xy(0, 0), ay = xy(1, 1) - xy(1, 0);
    const Scalar bx = xy(0, 2) - xy(0, 0), by = xy(1, 2) - xy(1, 0);
    return Scalar(0.5) * (ax * by - ay * bx);
}

template <typename Scalar> Scalar checked_area(const Coords<Scalar>& xy)
{
    const Scalar area = signed_area(xy);
    if (!(area > Scalar(0)))
        throw Error(ErrorCode::degenerate_element, "triangle has non-positive area");
    return area;
}

/// Constant shape-function gradients; column a is grad N_a.
template <typename Scalar> Eigen::Matrix<Scalar, 2, 3> shape_gradients(const Coords<Scalar>& xy)
{
    const Scalar two_area = Scalar(2) * checked_area(xy);
    Eigen::Matrix<Scalar, 2, 3> g;
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        g(0, a) = (xy(1, b) - xy(1, c)) / two_area;
        g(1, a) = (xy(0, c) - xy(0, b)) / two_area;
    }
    return g;
}

/// Conduction block: integral of d grad(w) . K grad(theta).
template <typename Scalar>
Mat3<Scalar> stiffness(const Coords<Scalar>& xy, const Mat2<Scalar>& conductivity, Scalar thickness)
{
    const auto g = shape_gradients(xy);
    return (thickness * signed_area(xy)) * (g.transpose() * conductivity * g);
}

/// Consistent mass scaled by h_T: h_T A / 12 [[2,1,1],[1,2,1],[1,1,2]].
template <typename Scalar> Mat3<Scalar> convection(const Coords<Scalar>& xy, Scalar h)
{
    const Scalar scale = h * checked_area(xy) / Scalar(12);
    return scale * (Mat3<Scalar>::Constant(Scalar(1)) + Mat3<Scalar>::Identity());
}

/// Load of a constant nodal value per unit area: value * A / 3 on every node.
/// Serves both the source f and the ambient term h_T theta_amb.
template <typename Scalar> Vec3<Scalar> load(const Coords<Scalar>& xy, Scalar value)
{
    return Vec3<Scalar>::Constant(value * checked_area(xy) / Scalar(3));
}

/// Right-hand side matching `convection`: h_T theta_amb A / 3 per node.
template <typename Scalar> Vec3<Scalar> convection_rhs(const Coords<Scalar>& xy, Scalar h, Scalar ambient)
{
    return load(xy, h * ambient);
}

/// Segment block of chi w dtheta/ds with linear w; nodes ordered by increasing s.
/// Independent of the segment length.
template <typename Scalar> Eigen::Matrix<Scalar, 2, 2> advection(Scalar chi)
{
    Eigen::Matrix<Scalar, 2, 2> m;
    m << -1, 1, -1, 1;
    return (chi / Scalar(2)) * m;
}

/// Radiative residual integral eps sigma (theta^4 - theta_amb^4) w and its
/// Jacobian 4 eps sigma theta^3 w v, both by the edge-midpoint rule.
template <typename Scalar>
std::pair<Vec3<Scalar>, Mat3<Scalar>> radiation(const Coords<Scalar>& xy, Scalar emissivity, Scalar sigma,
                                                Scalar ambient, const Vec3<Scalar>& theta)
{
    const Scalar weight = checked_area(xy) / Scalar(3);
    const Scalar es = emissivity * sigma;
    const Scalar amb4 = ambient * ambient * ambient * ambient;
    Vec3<Scalar> residual = Vec3<Scalar>::Zero();
    Mat3<Scalar> jacobian = Mat3<Scalar>::Zero();
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3;
        // Shape functions at the midpoint of edge (a, b): 1/2 at a and b, 0 elsewhere.
        const Scalar tq = Scalar(0.5) * (theta(a) + theta(b));
        const Scalar t3 = tq * tq * tq;
        const Scalar flux = weight * es * (t3 * tq - amb4);
        const Scalar slope = weight * Scalar(4) * es * t3;
        residual(a) += Scalar(0.5) * flux;
        residual(b) += Scalar(0.5) * flux;
        jacobian(a, a) += Scalar(0.25) * slope;
        jacobian(a, b) += Scalar(0.25) * slope;
        jacobian(b, a) += Scalar(0.25) * slope;
        jacobian(b, b) += Scalar(0.25) * slope;
    }
    return {residual, jacobian};
}

} // namespace vascutherm::element
