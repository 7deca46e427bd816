#pragma once

#include <cmath>
#include <vector>

namespace wiris {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec3 normalized() const;
    Vec2 xy() const { return {x, y}; }
};

double distance(const Vec3& a, const Vec3& b);
double distance(const Vec2& a, const Vec2& b);

/// True if segments [a1,a2] and [b1,b2] intersect (touching counts).
bool segments_intersect(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2);

/// Shortest distance from point p to segment [a,b].
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Ray-cast point-in-polygon test; boundary points count as inside.
bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& polygon);

double deg2rad(double deg);
double rad2deg(double rad);

/// Wraps an angle in radians into [0, 2*pi).
double wrap_2pi(double rad);

}  // namespace wiris
