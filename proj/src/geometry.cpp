#include "orthoplan/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace orthoplan {

UnitQuaternion UnitQuaternion::from_wxyz(double w, double x, double y, double z) {
    if (!std::isfinite(w) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
        throw std::invalid_argument("quaternion components must be finite");
    }
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (n < 1e-300) {
        throw std::invalid_argument("cannot normalize a zero quaternion");
    }
    // Already unit up to rounding: keep the components so stored poses read back bit-exact.
    if (std::abs(n - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon()) return {w, x, y, z};
    return {w / n, x / n, y / n, z / n};
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle_rad) {
    const double n = orthoplan::norm(axis);
    if (!std::isfinite(angle_rad) || !orthoplan::is_finite(axis) || n < 1e-300) {
        throw std::invalid_argument("axis-angle requires a finite, non-zero axis");
    }
    const double s = std::sin(angle_rad / 2.0) / n;
    return from_wxyz(std::cos(angle_rad / 2.0), axis.x * s, axis.y * s, axis.z * s);
}

UnitQuaternion UnitQuaternion::from_rotation_matrix(const Mat3& r) {
    const double trace = r[0][0] + r[1][1] + r[2][2];
    if (trace > 0.0) {
        const double s = 2.0 * std::sqrt(trace + 1.0);
        return from_wxyz(0.25 * s, (r[2][1] - r[1][2]) / s, (r[0][2] - r[2][0]) / s,
                         (r[1][0] - r[0][1]) / s);
    }
    if (r[0][0] > r[1][1] && r[0][0] > r[2][2]) {
        const double s = 2.0 * std::sqrt(1.0 + r[0][0] - r[1][1] - r[2][2]);
        return from_wxyz((r[2][1] - r[1][2]) / s, 0.25 * s, (r[0][1] + r[1][0]) / s,
                         (r[0][2] + r[2][0]) / s);
    }
    if (r[1][1] > r[2][2]) {
        const double s = 2.0 * std::sqrt(1.0 + r[1][1] - r[0][0] - r[2][2]);
        return from_wxyz((r[0][2] - r[2][0]) / s, (r[0][1] + r[1][0]) / s, 0.25 * s,
                         (r[1][2] + r[2][1]) / s);
    }
    const double s = 2.0 * std::sqrt(1.0 + r[2][2] - r[0][0] - r[1][1]);
    return from_wxyz((r[1][0] - r[0][1]) / s, (r[0][2] + r[2][0]) / s, (r[1][2] + r[2][1]) / s,
                     0.25 * s);
}

UnitQuaternion UnitQuaternion::operator*(const UnitQuaternion& o) const {
    return from_wxyz(w_ * o.w_ - x_ * o.x_ - y_ * o.y_ - z_ * o.z_,
                     w_ * o.x_ + x_ * o.w_ + y_ * o.z_ - z_ * o.y_,
                     w_ * o.y_ - x_ * o.z_ + y_ * o.w_ + z_ * o.x_,
                     w_ * o.z_ + x_ * o.y_ - y_ * o.x_ + z_ * o.w_);
}

UnitQuaternion UnitQuaternion::operator-() const { return {-w_, -x_, -y_, -z_}; }

UnitQuaternion UnitQuaternion::conjugate() const { return {w_, -x_, -y_, -z_}; }

double UnitQuaternion::dot(const UnitQuaternion& o) const {
    return w_ * o.w_ + x_ * o.x_ + y_ * o.y_ + z_ * o.z_;
}

double UnitQuaternion::norm() const { return std::sqrt(dot(*this)); }

Vec3 UnitQuaternion::rotate(const Vec3& v) const {
    const Vec3 u{x_, y_, z_};
    const Vec3 t = 2.0 * orthoplan::cross(u, v);
    return v + w_ * t + orthoplan::cross(u, t);
}

Mat3 UnitQuaternion::to_rotation_matrix() const {
    const double xx = x_ * x_, yy = y_ * y_, zz = z_ * z_;
    const double xy = x_ * y_, xz = x_ * z_, yz = y_ * z_;
    const double wx = w_ * x_, wy = w_ * y_, wz = w_ * z_;
    return {{{1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy)},
             {2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx)},
             {2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy)}}};
}

double UnitQuaternion::angle() const {
    const double v = std::sqrt(x_ * x_ + y_ * y_ + z_ * z_);
    return 2.0 * std::atan2(v, std::abs(w_));
}

double angular_distance(const UnitQuaternion& a, const UnitQuaternion& b) {
    return (a.conjugate() * b).angle();
}

UnitQuaternion euler_to_quaternion(const EulerAnglesDeg& e) {
    if (!std::isfinite(e.rx) || !std::isfinite(e.ry) || !std::isfinite(e.rz)) {
        throw std::invalid_argument("Euler angles must be finite");
    }
    const auto qx = UnitQuaternion::from_axis_angle({1, 0, 0}, deg_to_rad(e.rx));
    const auto qy = UnitQuaternion::from_axis_angle({0, 1, 0}, deg_to_rad(e.ry));
    const auto qz = UnitQuaternion::from_axis_angle({0, 0, 1}, deg_to_rad(e.rz));
    return qx * qy * qz;
}

EulerAnglesDeg quaternion_to_euler(const UnitQuaternion& q) {
    // R = Rx(a) Ry(b) Rz(c): R02 = sin b, R12 = -sin a cos b, R22 = cos a cos b,
    // R01 = -cos b sin c, R00 = cos b cos c.
    const Mat3 r = q.to_rotation_matrix();
    const double cb = std::hypot(r[1][2], r[2][2]);
    const double b = std::atan2(r[0][2], cb);
    double a = 0.0;
    double c = 0.0;
    if (cb > 1e-12) {
        a = std::atan2(-r[1][2], r[2][2]);
        c = std::atan2(-r[0][1], r[0][0]);
    } else {
        // Gimbal lock: only a +/- c is observable; put it all into a.
        a = std::atan2(r[2][1], r[1][1]);
    }
    return {rad_to_deg(a), rad_to_deg(b), rad_to_deg(c)};
}

UnitQuaternion slerp(const UnitQuaternion& a, const UnitQuaternion& b, double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::invalid_argument("slerp parameter must lie in [0, 1]");
    }
    if (t == 0.0) return a;
    if (t == 1.0) return b;

    double d = a.dot(b);
    UnitQuaternion target = b;
    if (d < 0.0) {
        target = -b;
        d = -d;
    }
    const double theta = std::acos(std::clamp(d, -1.0, 1.0));
    double wa = 1.0 - t;
    double wb = t;
    if (theta >= 1e-8) {
        const double s = std::sin(theta);
        wa = std::sin((1.0 - t) * theta) / s;
        wb = std::sin(t * theta) / s;
    }
    return UnitQuaternion::from_wxyz(wa * a.w() + wb * target.w(), wa * a.x() + wb * target.x(),
                                     wa * a.y() + wb * target.y(), wa * a.z() + wb * target.z());
}

namespace {

Vec3 with_sign_convention(Vec3 v) {
    const std::array<double, 3> c{v.x, v.y, v.z};
    std::size_t largest = 0;
    for (std::size_t i = 1; i < 3; ++i) {
        if (std::abs(c[i]) > std::abs(c[largest])) largest = i;
    }
    return c[largest] < 0.0 ? -v : v;
}

}  // namespace

PrincipalFrame principal_axes(std::span<const Vec3> points) {
    if (points.empty()) {
        throw std::invalid_argument("principal_axes needs at least one point");
    }
    PrincipalFrame frame;
    Vec3 sum;
    for (const Vec3& p : points) sum += p;
    frame.centroid = sum / static_cast<double>(points.size());

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const Vec3& p : points) {
        const Eigen::Vector3d d(p.x - frame.centroid.x, p.y - frame.centroid.y,
                                p.z - frame.centroid.z);
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(points.size());

    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    const Eigen::Vector3d values = solver.eigenvalues();  // ascending
    const double largest = values(2);
    const double smallest = values(0);
    frame.degenerate = points.size() < 4 || !(largest > 0.0) || smallest <= 1e-12 * largest;

    if (!frame.degenerate) {
        for (int i = 0; i < 3; ++i) {
            const Eigen::Vector3d v = solver.eigenvectors().col(2 - i);
            frame.axes[static_cast<std::size_t>(i)] = with_sign_convention({v(0), v(1), v(2)});
            frame.eigenvalues[static_cast<std::size_t>(i)] = values(2 - i);
        }
    } else {
        frame.eigenvalues = {std::max(largest, 0.0), std::max(values(1), 0.0),
                             std::max(smallest, 0.0)};
    }

    for (std::size_t i = 0; i < 3; ++i) {
        double lo = 0.0;
        double hi = 0.0;
        for (const Vec3& p : points) {
            const double s = dot(p - frame.centroid, frame.axes[i]);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        frame.extents[i] = hi - lo;
    }
    return frame;
}

UnitQuaternion frame_orientation(const PrincipalFrame& frame) {
    const Vec3& a = frame.axes[0];
    const Vec3& b = frame.axes[1];
    Vec3 c = frame.axes[2];
    if (dot(cross(a, b), c) < 0.0) c = cross(a, b);
    const Mat3 r{{{a.x, b.x, c.x}, {a.y, b.y, c.y}, {a.z, b.z, c.z}}};
    return UnitQuaternion::from_rotation_matrix(r);
}

}  // namespace orthoplan
