/*
 * dirsynth : registration-based multi-contrast MR image synthesis
 *
 * Copyright 2026 the dirsynth authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DIRSYNTH_TYPES_HPP
#define DIRSYNTH_TYPES_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace dirsynth {

struct Index3 {
    int x = 0;
    int y = 0;
    int z = 0;

    friend bool operator==(const Index3&, const Index3&) = default;

    int min_component() const { return (x < y) ? (x < z ? x : z) : (y < z ? y : z); }
    int max_component() const { return (x > y) ? (x > z ? x : z) : (y > z ? y : z); }
};

inline std::size_t voxel_count(const Index3& d){
    return static_cast<std::size_t>(d.x) * static_cast<std::size_t>(d.y) * static_cast<std::size_t>(d.z);
}

// Flat layout shared by every module: x fastest, then y, then z.
inline std::size_t flat_index(const Index3& d, int x, int y, int z){
    return static_cast<std::size_t>(x)
         + static_cast<std::size_t>(d.x) * (static_cast<std::size_t>(y)
         + static_cast<std::size_t>(d.y) * static_cast<std::size_t>(z));
}

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Vec3&, const Vec3&) = default;

    Vec3& operator+=(const Vec3& o){ x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o){ x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s){ x *= s; y *= s; z *= s; return *this; }

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double max_abs_component() const {
        const double ax = std::fabs(x), ay = std::fabs(y), az = std::fabs(z);
        return (ax > ay) ? (ax > az ? ax : az) : (ay > az ? ay : az);
    }
};

inline Vec3 operator+(Vec3 a, const Vec3& b){ a += b; return a; }
inline Vec3 operator-(Vec3 a, const Vec3& b){ a -= b; return a; }
inline Vec3 operator*(Vec3 a, double s){ a *= s; return a; }
inline Vec3 operator*(double s, Vec3 a){ a *= s; return a; }

} // namespace dirsynth

#endif
