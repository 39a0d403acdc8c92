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

#ifndef DIRSYNTH_INTERP_DETAIL_HPP
#define DIRSYNTH_INTERP_DETAIL_HPP

#include <cmath>
#include <cstddef>

#include "dirsynth/types.hpp"

// Shared trilinear machinery for the sampler and the transform composition.
// Sample coordinates are voxel-centered; out-of-grid coordinates clamp to the
// boundary, and the clamped flags record which axes were clamped (used to
// zero derivatives there).

namespace dirsynth::detail {

struct TrilinearTaps {
    int i0[3];          // lower cell corner per axis
    int stride1[3];     // flat-index offset of the upper corner per axis (0 on degenerate axes)
    double t[3];        // in-cell fraction per axis
    bool clamped[3];    // unclamped coordinate fell outside [0, n-1]
};

inline void make_taps(const Index3& dims, const Vec3& coord, TrilinearTaps& taps){
    const int n[3] = {dims.x, dims.y, dims.z};
    const double c[3] = {coord.x, coord.y, coord.z};
    const std::size_t axis_stride[3] = {1,
                                        static_cast<std::size_t>(dims.x),
                                        static_cast<std::size_t>(dims.x) * static_cast<std::size_t>(dims.y)};
    for(int a = 0; a < 3; ++a){
        const double hi = static_cast<double>(n[a] - 1);
        double cc = c[a];
        taps.clamped[a] = (cc < 0.0) || (cc > hi);
        if(cc < 0.0){ cc = 0.0; }
        if(cc > hi){ cc = hi; }
        if(n[a] == 1){
            taps.i0[a] = 0;
            taps.stride1[a] = 0;
            taps.t[a] = 0.0;
        }else{
            int i0 = static_cast<int>(std::floor(cc));
            if(i0 > n[a] - 2){ i0 = n[a] - 2; }
            taps.i0[a] = i0;
            taps.stride1[a] = static_cast<int>(axis_stride[a]);
            taps.t[a] = cc - static_cast<double>(i0);
        }
    }
}

inline std::size_t base_index(const Index3& dims, const TrilinearTaps& taps){
    return flat_index(dims, taps.i0[0], taps.i0[1], taps.i0[2]);
}

// Trilinear interpolation of a scalar array at the prepared taps. The
// two-sided weight form is exact at t = 0 and t = 1, so integer sample
// coordinates reproduce grid values bit for bit.
template <class T>
inline double sample(const T* data, const Index3& dims, const TrilinearTaps& taps){
    const std::size_t b = base_index(dims, taps);
    const int sx = taps.stride1[0], sy = taps.stride1[1], sz = taps.stride1[2];
    const double tx = taps.t[0], ty = taps.t[1], tz = taps.t[2];
    const double ux = 1.0 - tx, uy = 1.0 - ty, uz = 1.0 - tz;

    const double v000 = static_cast<double>(data[b]);
    const double v100 = static_cast<double>(data[b + sx]);
    const double v010 = static_cast<double>(data[b + sy]);
    const double v110 = static_cast<double>(data[b + sx + sy]);
    const double v001 = static_cast<double>(data[b + sz]);
    const double v101 = static_cast<double>(data[b + sx + sz]);
    const double v011 = static_cast<double>(data[b + sy + sz]);
    const double v111 = static_cast<double>(data[b + sx + sy + sz]);

    const double c00 = ux * v000 + tx * v100;
    const double c10 = ux * v010 + tx * v110;
    const double c01 = ux * v001 + tx * v101;
    const double c11 = ux * v011 + tx * v111;
    const double c0 = uy * c00 + ty * c10;
    const double c1 = uy * c01 + ty * c11;
    return uz * c0 + tz * c1;
}

// Fused interpolation of a Vec3 array (one weight evaluation, three lerps).
inline Vec3 sample_vec(const Vec3* data, const Index3& dims, const TrilinearTaps& taps){
    const std::size_t b = base_index(dims, taps);
    const int sx = taps.stride1[0], sy = taps.stride1[1], sz = taps.stride1[2];
    const double tx = taps.t[0], ty = taps.t[1], tz = taps.t[2];

    const Vec3& v000 = data[b];
    const Vec3& v100 = data[b + sx];
    const Vec3& v010 = data[b + sy];
    const Vec3& v110 = data[b + sx + sy];
    const Vec3& v001 = data[b + sz];
    const Vec3& v101 = data[b + sx + sz];
    const Vec3& v011 = data[b + sy + sz];
    const Vec3& v111 = data[b + sx + sy + sz];

    const double ux = 1.0 - tx, uy = 1.0 - ty, uz = 1.0 - tz;
    auto lerp3 = [&](double a000, double a100, double a010, double a110,
                     double a001, double a101, double a011, double a111){
        const double c00 = ux * a000 + tx * a100;
        const double c10 = ux * a010 + tx * a110;
        const double c01 = ux * a001 + tx * a101;
        const double c11 = ux * a011 + tx * a111;
        const double c0 = uy * c00 + ty * c10;
        const double c1 = uy * c01 + ty * c11;
        return uz * c0 + tz * c1;
    };

    Vec3 out;
    out.x = lerp3(v000.x, v100.x, v010.x, v110.x, v001.x, v101.x, v011.x, v111.x);
    out.y = lerp3(v000.y, v100.y, v010.y, v110.y, v001.y, v101.y, v011.y, v111.y);
    out.z = lerp3(v000.z, v100.z, v010.z, v110.z, v001.z, v101.z, v011.z, v111.z);
    return out;
}

// Derivative of the trilinear interpolant with respect to the sample
// coordinate, zeroed on clamped axes. Piecewise constant per cell.
template <class T>
inline Vec3 sample_gradient(const T* data, const Index3& dims, const TrilinearTaps& taps){
    const std::size_t b = base_index(dims, taps);
    const int sx = taps.stride1[0], sy = taps.stride1[1], sz = taps.stride1[2];
    const double tx = taps.t[0], ty = taps.t[1], tz = taps.t[2];

    const double v000 = static_cast<double>(data[b]);
    const double v100 = static_cast<double>(data[b + sx]);
    const double v010 = static_cast<double>(data[b + sy]);
    const double v110 = static_cast<double>(data[b + sx + sy]);
    const double v001 = static_cast<double>(data[b + sz]);
    const double v101 = static_cast<double>(data[b + sx + sz]);
    const double v011 = static_cast<double>(data[b + sy + sz]);
    const double v111 = static_cast<double>(data[b + sx + sy + sz]);

    Vec3 g;
    g.x = (1.0 - ty) * (1.0 - tz) * (v100 - v000)
        + ty * (1.0 - tz) * (v110 - v010)
        + (1.0 - ty) * tz * (v101 - v001)
        + ty * tz * (v111 - v011);
    g.y = (1.0 - tx) * (1.0 - tz) * (v010 - v000)
        + tx * (1.0 - tz) * (v110 - v100)
        + (1.0 - tx) * tz * (v011 - v001)
        + tx * tz * (v111 - v101);
    g.z = (1.0 - tx) * (1.0 - ty) * (v001 - v000)
        + tx * (1.0 - ty) * (v101 - v100)
        + (1.0 - tx) * ty * (v011 - v010)
        + tx * ty * (v111 - v110);
    if(taps.clamped[0]){ g.x = 0.0; }
    if(taps.clamped[1]){ g.y = 0.0; }
    if(taps.clamped[2]){ g.z = 0.0; }
    return g;
}

// The 8 cell-corner flat indices and weights, for sampling one-hot label
// encodings without materializing them.
struct CornerTaps {
    std::size_t index[8];
    double weight[8];
    Vec3 weight_gradient[8]; // d weight / d coordinate, zeroed on clamped axes
};

inline void make_corner_taps(const Index3& dims, const TrilinearTaps& taps, CornerTaps& corners){
    const std::size_t b = base_index(dims, taps);
    const int sx = taps.stride1[0], sy = taps.stride1[1], sz = taps.stride1[2];
    const double tx = taps.t[0], ty = taps.t[1], tz = taps.t[2];
    const double wx[2] = {1.0 - tx, tx};
    const double wy[2] = {1.0 - ty, ty};
    const double wz[2] = {1.0 - tz, tz};
    const double dx[2] = {-1.0, 1.0};

    int k = 0;
    for(int cz = 0; cz < 2; ++cz){
        for(int cy = 0; cy < 2; ++cy){
            for(int cx = 0; cx < 2; ++cx, ++k){
                corners.index[k] = b + static_cast<std::size_t>(cx * sx + cy * sy + cz * sz);
                corners.weight[k] = wx[cx] * wy[cy] * wz[cz];
                Vec3 g;
                g.x = taps.clamped[0] ? 0.0 : dx[cx] * wy[cy] * wz[cz];
                g.y = taps.clamped[1] ? 0.0 : wx[cx] * dx[cy] * wz[cz];
                g.z = taps.clamped[2] ? 0.0 : wx[cx] * wy[cy] * dx[cz];
                corners.weight_gradient[k] = g;
            }
        }
    }
}

inline int nearest_index(int n, double c){
    int i = static_cast<int>(std::floor(c + 0.5));
    if(i < 0){ i = 0; }
    if(i > n - 1){ i = n - 1; }
    return i;
}

} // namespace dirsynth::detail

#endif
