#pragma once

// Small 3D kernel used by every other module: vectors, unit quaternions,
// intrinsic XYZ Euler angles, SLERP and principal-axis frames.

#include <array>
#include <cmath>
#include <span>

namespace orthoplan {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }
inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Row-major 3x3; m[row][col].
using Mat3 = std::array<std::array<double, 3>, 3>;

/// Rotation stored as a unit quaternion (w, x, y, z).
///
/// Every factory and operation renormalizes, so the norm stays within 1e-9 of 1.
/// q and -q describe the same rotation; equality here is component-wise.
class UnitQuaternion {
public:
    UnitQuaternion() = default;

    /// Normalizes the input; a quaternion already unit to within rounding is kept as is.
    /// Throws std::invalid_argument for a zero or non-finite quaternion.
    static UnitQuaternion from_wxyz(double w, double x, double y, double z);
    /// Rotation of `angle_rad` about `axis` (need not be unit length, must be non-zero).
    static UnitQuaternion from_axis_angle(const Vec3& axis, double angle_rad);
    /// Expects a proper rotation matrix (orthonormal, det = +1).
    static UnitQuaternion from_rotation_matrix(const Mat3& r);

    double w() const { return w_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }
    std::array<double, 4> wxyz() const { return {w_, x_, y_, z_}; }

    UnitQuaternion operator*(const UnitQuaternion& o) const;
    UnitQuaternion operator-() const;
    UnitQuaternion conjugate() const;
    double dot(const UnitQuaternion& o) const;
    double norm() const;
    Vec3 rotate(const Vec3& v) const;
    Mat3 to_rotation_matrix() const;
    /// Rotation angle in [0, pi].
    double angle() const;

    bool operator==(const UnitQuaternion&) const = default;

private:
    UnitQuaternion(double w, double x, double y, double z) : w_(w), x_(x), y_(y), z_(z) {}

    double w_ = 1.0;
    double x_ = 0.0;
    double y_ = 0.0;
    double z_ = 0.0;
};

/// Geodesic angle (radians, in [0, pi]) of the relative rotation a^-1 b.
double angular_distance(const UnitQuaternion& a, const UnitQuaternion& b);

/// (rx, ry, rz) = (torque, tip, rotation) in degrees, applied intrinsically X then Y then Z.
struct EulerAnglesDeg {
    double rx = 0.0;
    double ry = 0.0;
    double rz = 0.0;
};

UnitQuaternion euler_to_quaternion(const EulerAnglesDeg& e);
EulerAnglesDeg quaternion_to_euler(const UnitQuaternion& q);

/// Shortest-path spherical interpolation. t must lie in [0, 1]; t = 0 returns `a`
/// and t = 1 returns `b` exactly (no sign flip at the endpoint).
UnitQuaternion slerp(const UnitQuaternion& a, const UnitQuaternion& b, double t);

struct PrincipalFrame {
    Vec3 centroid;
    // Unit eigenvectors of the covariance, descending eigenvalue order.
    std::array<Vec3, 3> axes{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    std::array<double, 3> eigenvalues{};
    // Range of the point projections along each axis.
    std::array<double, 3> extents{};
    bool degenerate = false;
};

/// PCA frame of a point set. Each axis is sign-flipped so that its largest-magnitude
/// component is positive. A singular covariance yields the identity frame with
/// `degenerate` set. Throws std::invalid_argument for an empty input.
PrincipalFrame principal_axes(std::span<const Vec3> points);

/// Proper rotation whose columns are the frame axes. If the sign convention left the
/// axes left-handed, the third axis is replaced by axis0 x axis1.
UnitQuaternion frame_orientation(const PrincipalFrame& frame);

inline constexpr double kPi = 3.14159265358979323846;
constexpr double deg_to_rad(double d) { return d * kPi / 180.0; }
constexpr double rad_to_deg(double r) { return r * 180.0 / kPi; }

}  // namespace orthoplan
