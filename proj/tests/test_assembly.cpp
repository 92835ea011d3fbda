#include "dense_oracle.hpp"
#include "fixtures.hpp"
#include "random_problems.hpp"

#include "vascutherm/assembly.hpp"
#include "vascutherm/element.hpp"

#include <Eigen/Dense>
#include <doctest.h>

using namespace vascutherm;

namespace {

element::Coords<double> unit_triangle()
{
    element::Coords<double> xy;
    xy << 0, 1, 0, 0, 0, 1;
    return xy;
}

element::Coords<double> skew_triangle()
{
    element::Coords<double> xy;
    xy << 0.3, 2.1, 0.7, -0.2, 0.4, 1.9;
    return xy;
}

Eigen::MatrixXd dense(const SparseMatrix& m)
{
    return Eigen::MatrixXd(m);
}

// Two-triangle unit square with every side adiabatic.
ThermalProblem unit_square(double h, double f, double amb)
{
    Mesh mesh = generate_rect_mesh(1.0, 1.0, 1, 1);
    ThermalProblem p;
    apply_side_conditions(mesh, p.loads, {Adiabatic{}, Adiabatic{}, Adiabatic{}, Adiabatic{}});
    p.material.thickness = 1.0;
    p.material.conductivity = MaterialParams::isotropic(1.0);
    p.material.convection_coefficient = h;
    p.loads.ambient_temperature = amb;
    p.loads.source = rect_source(mesh, f, std::nullopt);
    p.mesh = std::make_shared<const Mesh>(std::move(mesh));
    return p;
}

// Hand-assembled 4x4 for unit_square with K = I, d = 1. Triangles (0,1,3)
// and (0,3,2); node 0 = (0,0), 1 = (1,0), 2 = (0,1), 3 = (1,1).
Eigen::Matrix4d unit_square_matrix(double h)
{
    // Stiffness: gradients (-1,0), (1,-1), (0,1) on (0,1,3) and (0,-1),
    // (1,0), (-1,1) on (0,3,2), times A = 1/2.
    Eigen::Matrix4d k;
    k << 1.0, -0.5, -0.5, 0.0,
        -0.5, 1.0, 0.0, -0.5,
        -0.5, 0.0, 1.0, -0.5,
        0.0, -0.5, -0.5, 1.0;
    Eigen::Matrix4d m;
    // Mass: A = 1/2 per triangle, shared diagonal nodes 0 and 3.
    m << 4.0, 1.0, 1.0, 2.0,
        1.0, 2.0, 0.0, 1.0,
        1.0, 0.0, 2.0, 1.0,
        2.0, 1.0, 1.0, 4.0;
    return k + h / 24.0 * m;
}

} // namespace

TEST_SUITE("element") {

TEST_CASE("stiffness of the unit right triangle")
{
    const auto k = element::stiffness<double>(unit_triangle(), Eigen::Matrix2d::Identity(), 1.0);
    Eigen::Matrix3d expected;
    expected << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
    CHECK((k - expected).cwiseAbs().maxCoeff() <= 1e-15);
    const auto k2 = element::stiffness<double>(unit_triangle(), 2.0 * Eigen::Matrix2d::Identity(), 1.0);
    CHECK(k2 == 2.0 * k);
}

TEST_CASE("stiffness is symmetric PSD with constants in the kernel")
{
    Eigen::Matrix2d aniso;
    aniso << 2.0, 0.3, 0.3, 0.7;
    const auto k = element::stiffness<double>(skew_triangle(), aniso, 4.31e-3);
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-16);
    CHECK(k.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(k);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-15);
}

TEST_CASE("degenerate and clockwise triangles are rejected")
{
    element::Coords<double> flat;
    flat << 0, 1, 2, 0, 1, 2;
    CHECK_THROWS_AS(element::stiffness<double>(flat, Eigen::Matrix2d::Identity(), 1.0), Error);
    element::Coords<double> cw;
    cw << 0, 0, 1, 0, 1, 0;
    try {
        element::convection<double>(cw, 1.0);
        FAIL("expected degenerate-element");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::degenerate_element);
    }
}

TEST_CASE("convection mass")
{
    const auto m = element::convection<double>(unit_triangle(), 12.0);
    Eigen::Matrix3d expected;
    expected << 1, 0.5, 0.5, 0.5, 1, 0.5, 0.5, 0.5, 1;
    CHECK((m - expected).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(element::convection<double>(unit_triangle(), 0.0).isZero(0.0));
    const auto s = element::convection<double>(skew_triangle(), 7.0);
    const double a = element::signed_area(skew_triangle());
    for (int i = 0; i < 3; ++i)
        CHECK(s.row(i).sum() == doctest::Approx(7.0 * a / 3.0).epsilon(1e-14));
    const auto rhs = element::convection_rhs<double>(unit_triangle(), 12.0, 300.0);
    CHECK(rhs.isApprox(Eigen::Vector3d::Constant(12.0 * 300.0 * 0.5 / 3.0), 1e-15));
}

TEST_CASE("advection block")
{
    Eigen::Matrix2d expected;
    expected << -1, 1, -1, 1;
    CHECK(element::advection<double>(2.0) == expected);
    CHECK(element::advection<double>(0.0).isZero(0.0));
    CHECK(element::advection<double>(0.8062).rowwise().sum().isZero(0.0));
}

TEST_CASE("source load")
{
    CHECK(element::load<double>(unit_triangle(), 6.0) == Eigen::Vector3d::Ones());
    CHECK(element::load<double>(unit_triangle(), 0.0).isZero(0.0));
    const double a = element::signed_area(skew_triangle());
    CHECK(element::load<double>(skew_triangle(), 3.5).sum() == doctest::Approx(3.5 * a).epsilon(1e-14));
}

TEST_CASE("radiation block")
{
    const Eigen::Vector3d amb = Eigen::Vector3d::Constant(300.0);
    auto [r0, j0] = element::radiation<double>(skew_triangle(), 0.9, kStefanBoltzmann, 300.0, amb);
    CHECK(r0.isZero(0.0));

    // Area-one triangle, eps sigma = 1, cold surroundings.
    element::Coords<double> big;
    big << 0, 2, 0, 0, 0, 1;
    auto [r1, j1] = element::radiation<double>(big, 1.0, 1.0, 0.0, Eigen::Vector3d::Constant(3.0));
    CHECK(r1.sum() == doctest::Approx(81.0).epsilon(1e-15));
    CHECK((j1 - j1.transpose()).cwiseAbs().maxCoeff() == 0.0);

    auto [r2, j2] = element::radiation<double>(skew_triangle(), 0.0, kStefanBoltzmann, 280.0,
                                               Eigen::Vector3d(310.0, 290.0, 330.0));
    CHECK(r2.isZero(0.0));
    CHECK(j2.isZero(0.0));
}

TEST_CASE("radiation Jacobian matches finite differences and is PSD")
{
    const Eigen::Vector3d th(310.0, 287.0, 342.0);
    const double eps = 0.8, sigma = kStefanBoltzmann, amb = 295.0;
    auto [r, j] = element::radiation<double>(skew_triangle(), eps, sigma, amb, th);
    for (int c = 0; c < 3; ++c) {
        const double step = 1e-3;
        Eigen::Vector3d up = th, dn = th;
        up(c) += step;
        dn(c) -= step;
        const Eigen::Vector3d fd = (element::radiation<double>(skew_triangle(), eps, sigma, amb, up).first -
                                    element::radiation<double>(skew_triangle(), eps, sigma, amb, dn).first) /
                                   (2.0 * step);
        CHECK((fd - j.col(c)).norm() <= 1e-7 * j.col(c).norm());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(j);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-15 * eig.eigenvalues().maxCoeff());
}

TEST_CASE("kernels agree with long double evaluation")
{
    element::Coords<long double> xyl = skew_triangle().cast<long double>();
    Eigen::Matrix<long double, 2, 2> kl;
    kl << 2.0L, 0.3L, 0.3L, 0.7L;
    const auto ref = element::stiffness<long double>(xyl, kl, 1.0L);
    Eigen::Matrix2d kd;
    kd << 2.0, 0.3, 0.3, 0.7;
    const auto k = element::stiffness<double>(skew_triangle(), kd, 1.0);
    CHECK((k.cast<long double>() - ref).cwiseAbs().maxCoeff() <= 1e-14L);
}

} // TEST_SUITE

TEST_SUITE("assembly") {

TEST_CASE("two-triangle system by hand")
{
    const double h = 6.0, f = 3.0, amb = 290.0;
    const auto p = unit_square(h, f, amb);
    const auto sys = assemble(p);
    REQUIRE(sys.num_free() == 4);
    CHECK((dense(sys.matrix) - unit_square_matrix(h)).cwiseAbs().maxCoeff() <= 1e-14);
    // Nodes 0 and 3 touch both triangles.
    const double a3 = 0.5 / 3.0;
    const Eigen::Vector4d rhs = (f + h * amb) * a3 * Eigen::Vector4d(2, 1, 1, 2);
    CHECK((sys.rhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(sys.constraint_map.empty());
}

TEST_CASE("eliminating node 0")
{
    const double h = 6.0, amb = 290.0, t0 = 350.0;
    auto p = unit_square(h, 0.0, amb);
    p.loads.dirichlet[0] = t0;  // validation not needed for the algebra
    const auto sys = assemble(p);
    REQUIRE(sys.num_free() == 3);
    const Eigen::Matrix4d full = unit_square_matrix(h);
    CHECK((dense(sys.matrix) - full.bottomRightCorner<3, 3>()).cwiseAbs().maxCoeff() <= 1e-14);
    const Eigen::Vector3d load = h * amb * 0.5 / 3.0 * Eigen::Vector3d(1, 1, 2);
    const Eigen::Vector3d rhs = load - full.block<3, 1>(1, 0) * t0;
    CHECK((sys.rhs - rhs).cwiseAbs().maxCoeff() <= 1e-11);
    CHECK(sys.free_nodes == std::vector<Index>{1, 2, 3});
    CHECK(sys.node_to_free == std::vector<Index>{-1, 0, 1, 2});
    const Eigen::VectorXd x = Eigen::Vector3d(1, 2, 3);
    CHECK(sys.expand(x) == Eigen::Vector4d(t0, 1, 2, 3));
    CHECK(sys.restrict(Eigen::Vector4d(9, 1, 2, 3)) == x);
}

TEST_CASE("no flow means a symmetric matrix")
{
    auto p = fixtures::plate(0.1, 6, 100.0, 300.0, PrescribedFlux{2.0});
    fixtures::add_straight_channel(p, 0.0, 300.0);
    const auto m = dense(assemble(p).matrix);
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * m.cwiseAbs().maxCoeff());
    fixtures::add_straight_channel(p, 1e-4, 300.0);
    const auto m2 = dense(assemble(p).matrix);
    CHECK((m2 - m2.transpose()).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("ambient is the exact solution without sources")
{
    auto p = fixtures::plate(0.07, 5, 0.0, 301.5);
    const auto sys = assemble(p);
    const Eigen::VectorXd theta = Eigen::VectorXd::Constant(sys.num_free(), 301.5);
    CHECK((dense(sys.matrix) * theta - sys.rhs).cwiseAbs().maxCoeff() <= 1e-12 * sys.rhs.cwiseAbs().maxCoeff());
    CHECK(nodal_residual(p, theta).cwiseAbs().maxCoeff() <= 1e-12 * sys.rhs.cwiseAbs().maxCoeff());
}

TEST_CASE("channel term vanishes on a constant field")
{
    auto with = fixtures::plate(0.1, 6, 0.0, 300.0);
    fixtures::add_straight_channel(with, 2e-4, 300.0);
    auto without = with;
    without.flow.mass_flow_rate = 0.0;
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(with.mesh->num_nodes(), 317.0);
    const Eigen::VectorXd diff =
        assemble_linear_operator(with).matrix * c - assemble_linear_operator(without).matrix * c;
    CHECK(diff.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("inlet joins the constraints only with flow")
{
    auto p = fixtures::plate(0.1, 4, 0.0, 300.0);
    fixtures::add_straight_channel(p, 0.0, 310.0);
    CHECK(constraint_map(p).empty());
    p.flow.mass_flow_rate = 1e-4;
    const auto c = constraint_map(p);
    REQUIRE(c.size() == 1);
    CHECK(c.at(p.path->inlet()) == 310.0);
}

TEST_CASE("conflicting inlet constraint")
{
    auto p = fixtures::plate(0.1, 4, 0.0, 300.0, PrescribedTemperature{300.0});
    fixtures::add_straight_channel(p, 1e-4, 310.0);
    try {
        assemble(p);
        FAIL("expected conflicting-constraint");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::conflicting_constraint);
    }
    p.flow.inlet_temperature = 300.0;
    CHECK_NOTHROW(assemble(p));
}

TEST_CASE("radiative assembly needs an iterate")
{
    auto p = fixtures::uniform_radiative(3);
    CHECK_THROWS_AS(assemble(p), Error);
    CHECK_NOTHROW(assemble(p, Eigen::VectorXd::Constant(p.mesh->num_nodes(), 300.0)));
    CHECK_THROWS_AS(assemble(p, Eigen::VectorXd::Constant(3, 300.0)), Error);
}

TEST_CASE("Neumann data enters the load with the outward sign")
{
    auto p = fixtures::plate(1.0, 2, 0.0, 300.0, PrescribedFlux{4.0});
    const auto op = assemble_linear_operator(p);
    const auto q = fixtures::plate(1.0, 2, 0.0, 300.0);
    const Eigen::VectorXd d = op.load - assemble_linear_operator(q).load;
    // Perimeter 4 m at 4 W/m leaves the plate.
    CHECK(d.sum() == doctest::Approx(-16.0).epsilon(1e-14));
    CHECK(d(0) == doctest::Approx(-2.0));  // corner: two half edges of 0.5 m
    CHECK(d(1) == doctest::Approx(-2.0));  // mid-side: two half edges
    CHECK(d(4) == 0.0);
}

TEST_CASE("global Jacobian matches finite differences of the residual")
{
    testgen::Rng rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        auto p = testgen::random_small_problem(rng, true);
        const Index n = p.mesh->num_nodes();
        Eigen::VectorXd theta(n);
        for (Index i = 0; i < n; ++i)
            theta(i) = testgen::uniform(rng, 270.0, 360.0);
        const auto op = assemble_linear_operator(p);
        const Eigen::MatrixXd jac = dense(op.matrix) + dense(assemble_radiation(p, theta).jacobian);
        Eigen::MatrixXd fd(n, n);
        for (Index c = 0; c < n; ++c) {
            const double step = 1e-3;
            Eigen::VectorXd up = theta, dn = theta;
            up(c) += step;
            dn(c) -= step;
            fd.col(c) = (nodal_residual(p, up) - nodal_residual(p, dn)) / (2.0 * step);
        }
        CHECK((fd - jac).cwiseAbs().maxCoeff() <= 1e-7 * jac.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("sparse assembly equals the dense oracle on small meshes")
{
    testgen::Rng rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const bool radiative = trial % 2 == 1;
        const auto p = testgen::random_small_problem(rng, radiative);
        const auto op = assemble_linear_operator(p);
        const auto ref = oracle::assemble_dense(p);
        const double scale = std::max(ref.matrix.cwiseAbs().maxCoeff(), 1.0);
        CHECK((dense(op.matrix) - ref.matrix).cwiseAbs().maxCoeff() <= 1e-12 * scale);
        CHECK((op.load - ref.load).cwiseAbs().maxCoeff() <= 1e-12 * std::max(ref.load.cwiseAbs().maxCoeff(), 1.0));
        if (radiative) {
            const Eigen::VectorXd theta = Eigen::VectorXd::LinSpaced(p.mesh->num_nodes(), 280.0, 340.0);
            const auto rad = assemble_radiation(p, theta);
            const auto [rr, rj] = oracle::radiation_dense(p, theta);
            CHECK((rad.residual - rr).cwiseAbs().maxCoeff() <= 1e-12 * std::max(rr.cwiseAbs().maxCoeff(), 1.0));
            CHECK((dense(rad.jacobian) - rj).cwiseAbs().maxCoeff() <= 1e-12 * std::max(rj.cwiseAbs().maxCoeff(), 1.0));
        }
    }
}

TEST_CASE("segment Peclet number")
{
    // Square cells: each of the two triangles on a grid edge couples its
    // nodes by -k d / 2.
    auto p = fixtures::plate(0.1, 10, 0.0, 300.0);
    fixtures::add_straight_channel(p, 1e-4, 300.0);
    const double chi = p.heat_capacity_rate();
    const double coupling = fixtures::baseline_conductivity * fixtures::baseline_thickness;
    const auto pe = segment_peclet(p);
    REQUIRE(pe.size() == 10);
    for (double v : pe)
        CHECK(v == doctest::Approx(chi / coupling).epsilon(1e-12));
    p.path.reset();
    CHECK(segment_peclet(p).empty());
}

} // TEST_SUITE
