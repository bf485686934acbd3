#include "orthoplan/geometry.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <stdexcept>
#include <vector>

using namespace orthoplan;

namespace {

Mat3 matmul(const Mat3& a, const Mat3& b) {
    Mat3 c{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
}

Mat3 rot_x(double deg) {
    const double c = std::cos(deg_to_rad(deg)), s = std::sin(deg_to_rad(deg));
    return {{{1, 0, 0}, {0, c, -s}, {0, s, c}}};
}
Mat3 rot_y(double deg) {
    const double c = std::cos(deg_to_rad(deg)), s = std::sin(deg_to_rad(deg));
    return {{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
}
Mat3 rot_z(double deg) {
    const double c = std::cos(deg_to_rad(deg)), s = std::sin(deg_to_rad(deg));
    return {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
}

void check_vec(const Vec3& a, const Vec3& b, double tol = 1e-12) {
    CHECK(std::abs(a.x - b.x) <= tol);
    CHECK(std::abs(a.y - b.y) <= tol);
    CHECK(std::abs(a.z - b.z) <= tol);
}

}  // namespace

TEST_CASE("vector arithmetic") {
    constexpr Vec3 a{1, 2, 3};
    constexpr Vec3 b{-4, 0.5, 2};
    static_assert(dot(a, b) == -4 + 1 + 6);
    static_assert(cross(Vec3{1, 0, 0}, Vec3{0, 1, 0}) == Vec3{0, 0, 1});
    CHECK(norm(Vec3{3, 4, 12}) == 13.0);
    CHECK(distance(a, a) == 0.0);
    CHECK_FALSE(is_finite(Vec3{std::nan(""), 0, 0}));
}

TEST_CASE("quaternion factories validate and normalize") {
    CHECK_THROWS_AS(UnitQuaternion::from_wxyz(0, 0, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(UnitQuaternion::from_wxyz(INFINITY, 0, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(UnitQuaternion::from_axis_angle({0, 0, 0}, 1.0), std::invalid_argument);
    const auto q = UnitQuaternion::from_wxyz(2, 0, 0, 0);
    CHECK(q.w() == 1.0);
    CHECK(std::abs(UnitQuaternion::from_wxyz(1, 2, 3, 4).norm() - 1.0) < 1e-12);
}

TEST_CASE("rotating about z by 90 degrees maps x to y") {
    const auto q = UnitQuaternion::from_axis_angle({0, 0, 1}, kPi / 2);
    check_vec(q.rotate({1, 0, 0}), {0, 1, 0});
    CHECK(std::abs(q.angle() - kPi / 2) < 1e-12);
}

TEST_CASE("euler angles compose intrinsically X then Y then Z") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ang(-89.0, 89.0);
    for (int i = 0; i < 200; ++i) {
        const EulerAnglesDeg e{ang(rng), ang(rng), ang(rng)};
        const Mat3 expected = matmul(matmul(rot_x(e.rx), rot_y(e.ry)), rot_z(e.rz));
        const Mat3 got = euler_to_quaternion(e).to_rotation_matrix();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) CHECK(std::abs(got[r][c] - expected[r][c]) < 1e-12);
    }
}

TEST_CASE("euler round trip within (-90, 90) per axis") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> ang(-89.9, 89.9);
    for (int i = 0; i < 2000; ++i) {
        const EulerAnglesDeg e{ang(rng), ang(rng), ang(rng)};
        const EulerAnglesDeg back = quaternion_to_euler(euler_to_quaternion(e));
        REQUIRE(std::abs(back.rx - e.rx) < 1e-6);
        REQUIRE(std::abs(back.ry - e.ry) < 1e-6);
        REQUIRE(std::abs(back.rz - e.rz) < 1e-6);
    }
}

TEST_CASE("rotation matrix round trip") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> n;
    for (int i = 0; i < 500; ++i) {
        const auto q = UnitQuaternion::from_wxyz(n(rng), n(rng), n(rng), n(rng));
        const auto back = UnitQuaternion::from_rotation_matrix(q.to_rotation_matrix());
        CHECK(angular_distance(q, back) < 1e-7);
    }
}

TEST_CASE("slerp endpoints are exact and progress is proportional to t") {
    std::mt19937_64 rng(14);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const auto a = UnitQuaternion::from_wxyz(n(rng), n(rng), n(rng), n(rng));
        const auto b = UnitQuaternion::from_wxyz(n(rng), n(rng), n(rng), n(rng));
        CHECK(slerp(a, b, 0.0) == a);
        CHECK(slerp(a, b, 1.0) == b);
        const double t = u(rng);
        const double total = angular_distance(a, b);
        const auto mid = slerp(a, b, t);
        CHECK(std::abs(angular_distance(a, mid) - t * total) < 1e-6);
        CHECK(std::abs(mid.norm() - 1.0) < 1e-9);
    }
    CHECK_THROWS_AS(slerp({}, {}, 1.5), std::invalid_argument);
}

TEST_CASE("slerp takes the short path for antipodal representations") {
    const auto a = UnitQuaternion::from_axis_angle({0, 0, 1}, 0.2);
    const auto b = -UnitQuaternion::from_axis_angle({0, 0, 1}, 0.4);
    const auto mid = slerp(a, b, 0.5);
    CHECK(std::abs(angular_distance(mid, UnitQuaternion::from_axis_angle({0, 0, 1}, 0.3))) < 1e-9);
}

TEST_CASE("principal axes agree with a Jacobi eigen-decomposition") {
    std::mt19937_64 rng(15);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 100; ++trial) {
        const Vec3 scale{5.0 + n(rng), 2.5, 1.0};
        const auto rot = UnitQuaternion::from_wxyz(n(rng), n(rng), n(rng), n(rng));
        const Vec3 offset{10 * n(rng), 10 * n(rng), 10 * n(rng)};
        std::vector<Vec3> pts;
        for (int i = 0; i < 300; ++i) {
            pts.push_back(offset + rot.rotate({scale.x * n(rng), scale.y * n(rng), scale.z * n(rng)}));
        }
        const PrincipalFrame f = principal_axes(pts);
        const oracle::Eigen3x3 ref = oracle::jacobi_symmetric(oracle::covariance(pts));
        REQUIRE_FALSE(f.degenerate);
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(f.eigenvalues[i] - ref.values[i]) < 1e-8 * (1 + ref.values[0]));
            const Vec3 rv{ref.vectors[i][0], ref.vectors[i][1], ref.vectors[i][2]};
            CHECK(std::abs(std::abs(dot(f.axes[i], rv)) - 1.0) < 1e-8);
            CHECK(std::abs(norm(f.axes[i]) - 1.0) < 1e-12);
            // Sign convention: largest-magnitude component is positive.
            const Vec3& ax = f.axes[i];
            const double big = std::abs(ax.x) >= std::abs(ax.y) && std::abs(ax.x) >= std::abs(ax.z) ? ax.x
                               : std::abs(ax.y) >= std::abs(ax.z)                                 ? ax.y
                                                                                                  : ax.z;
            CHECK(big > 0.0);
        }
        const UnitQuaternion q = frame_orientation(f);
        const Mat3 m = q.to_rotation_matrix();
        const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        CHECK(std::abs(det - 1.0) < 1e-9);
        check_vec(q.rotate({1, 0, 0}), f.axes[0], 1e-9);
    }
}

TEST_CASE("principal axes of an axis-aligned box report its extents") {
    std::vector<Vec3> pts;
    for (double x : {-3.0, 3.0})
        for (double y : {-1.0, 1.0})
            for (double z : {-0.5, 0.5}) pts.push_back({x + 1, y + 2, z + 3});
    const PrincipalFrame f = principal_axes(pts);
    check_vec(f.centroid, {1, 2, 3});
    CHECK(std::abs(f.extents[0] - 6.0) < 1e-12);
    CHECK(std::abs(f.extents[1] - 2.0) < 1e-12);
    CHECK(std::abs(f.extents[2] - 1.0) < 1e-12);
    check_vec(f.axes[0], {1, 0, 0});
}

TEST_CASE("degenerate and empty point sets") {
    const std::vector<Vec3> same(5, Vec3{1, 1, 1});
    const PrincipalFrame f = principal_axes(same);
    CHECK(f.degenerate);
    check_vec(f.axes[0], {1, 0, 0});
    CHECK(frame_orientation(f) == UnitQuaternion{});
    CHECK_THROWS_AS(principal_axes(std::vector<Vec3>{}), std::invalid_argument);
}
