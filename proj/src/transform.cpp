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

#include "dirsynth/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "interp_detail.hpp"

namespace dirsynth {

VelocityField VelocityField::zeros(const Index3& dims, const Vec3& spacing){
    VelocityField v;
    v.dims = dims;
    v.spacing = spacing;
    v.vectors.assign(dirsynth::voxel_count(dims), Vec3{});
    return v;
}

DisplacementField DisplacementField::zeros(const Index3& dims, const Vec3& spacing){
    DisplacementField u;
    u.dims = dims;
    u.spacing = spacing;
    u.vectors.assign(dirsynth::voxel_count(dims), Vec3{});
    return u;
}

namespace {

double max_norm(const std::vector<Vec3>& vectors){
    double m = 0.0;
    for(const Vec3& v : vectors){
        const double n = v.norm();
        if(n > m){ m = n; }
    }
    return m;
}

// One self-composition step: out(x) = f(x) + f(x + f(x)).
void self_compose(const Index3& dims, const std::vector<Vec3>& field, std::vector<Vec3>& out){
    detail::TrilinearTaps taps;
    std::size_t idx = 0;
    for(int z = 0; z < dims.z; ++z){
        for(int y = 0; y < dims.y; ++y){
            for(int x = 0; x < dims.x; ++x, ++idx){
                const Vec3& f = field[idx];
                const Vec3 coord{static_cast<double>(x) + f.x,
                                 static_cast<double>(y) + f.y,
                                 static_cast<double>(z) + f.z};
                detail::make_taps(dims, coord, taps);
                out[idx] = f + detail::sample_vec(field.data(), dims, taps);
            }
        }
    }
}

} // namespace

double max_vector_norm(const VelocityField& v){ return max_norm(v.vectors); }
double max_vector_norm(const DisplacementField& u){ return max_norm(u.vectors); }

int required_exp_steps(const VelocityField& v){
    const double m = max_vector_norm(v);
    int steps = 1;
    while(std::ldexp(m, -steps) >= 0.5 && steps < 63){
        ++steps;
    }
    return steps;
}

DisplacementField exponentiate(const VelocityField& v, int steps){
    if(steps < 1){
        throw std::invalid_argument("exponentiate requires steps >= 1");
    }
    if(v.vectors.size() != v.voxel_count()){
        throw std::invalid_argument("velocity field vector count does not match dims");
    }
    const double m = max_vector_norm(v);
    if(std::ldexp(m, -steps) >= 0.5){
        throw std::invalid_argument("exponentiate stability guard violated: max|v| = " + std::to_string(m) +
                                    " requires at least " + std::to_string(required_exp_steps(v)) +
                                    " steps, got " + std::to_string(steps));
    }

    DisplacementField u;
    u.dims = v.dims;
    u.spacing = v.spacing;
    u.provenance = FieldProvenance::exponential;
    u.exp_steps = steps;

    const double scale = std::ldexp(1.0, -steps);
    u.vectors.resize(v.vectors.size());
    for(std::size_t i = 0; i < v.vectors.size(); ++i){
        u.vectors[i] = v.vectors[i] * scale;
    }

    std::vector<Vec3> scratch(u.vectors.size());
    for(int k = 0; k < steps; ++k){
        self_compose(u.dims, u.vectors, scratch);
        u.vectors.swap(scratch);
    }
    return u;
}

DisplacementField compose(const DisplacementField& outer, const DisplacementField& inner){
    if(!(outer.dims == inner.dims)){
        throw std::invalid_argument("compose requires matching dims");
    }
    DisplacementField out;
    out.dims = inner.dims;
    out.spacing = inner.spacing;
    out.provenance = FieldProvenance::direct;
    out.vectors.resize(inner.vectors.size());

    detail::TrilinearTaps taps;
    std::size_t idx = 0;
    for(int z = 0; z < out.dims.z; ++z){
        for(int y = 0; y < out.dims.y; ++y){
            for(int x = 0; x < out.dims.x; ++x, ++idx){
                const Vec3& in = inner.vectors[idx];
                const Vec3 coord{static_cast<double>(x) + in.x,
                                 static_cast<double>(y) + in.y,
                                 static_cast<double>(z) + in.z};
                detail::make_taps(out.dims, coord, taps);
                out.vectors[idx] = in + detail::sample_vec(outer.vectors.data(), out.dims, taps);
            }
        }
    }
    return out;
}

Volume jacobian_determinant(const DisplacementField& u){
    if(u.dims.x < 3 || u.dims.y < 3 || u.dims.z < 3){
        throw std::invalid_argument("jacobian_determinant requires dims >= 3 per axis");
    }

    Volume det = Volume::zeros(u.dims, u.spacing);
    const Index3 d = u.dims;

    // d(component c of u)/d(axis a), central inside, one-sided at faces
    auto derivative = [&](int x, int y, int z, int axis) -> Vec3 {
        int lo[3] = {x, y, z};
        int hi[3] = {x, y, z};
        const int n[3] = {d.x, d.y, d.z};
        double denom = 2.0;
        if(lo[axis] == 0){
            denom = 1.0;
        }else{
            --lo[axis];
        }
        if(hi[axis] == n[axis] - 1){
            denom = 1.0;
        }else{
            ++hi[axis];
        }
        const Vec3& a = u.vectors[flat_index(d, hi[0], hi[1], hi[2])];
        const Vec3& b = u.vectors[flat_index(d, lo[0], lo[1], lo[2])];
        return (a - b) * (1.0 / denom);
    };

    std::size_t idx = 0;
    for(int z = 0; z < d.z; ++z){
        for(int y = 0; y < d.y; ++y){
            for(int x = 0; x < d.x; ++x, ++idx){
                const Vec3 gx = derivative(x, y, z, 0);
                const Vec3 gy = derivative(x, y, z, 1);
                const Vec3 gz = derivative(x, y, z, 2);
                // rows of I + grad(u)
                const double a00 = 1.0 + gx.x, a01 = gy.x, a02 = gz.x;
                const double a10 = gx.y, a11 = 1.0 + gy.y, a12 = gz.y;
                const double a20 = gx.z, a21 = gy.z, a22 = 1.0 + gz.z;
                det.data[idx] = a00 * (a11 * a22 - a12 * a21)
                              - a01 * (a10 * a22 - a12 * a20)
                              + a02 * (a10 * a21 - a11 * a20);
            }
        }
    }
    return det;
}

double min_interior_value(const Volume& v){
    if(v.dims.x < 3 || v.dims.y < 3 || v.dims.z < 3){
        throw std::invalid_argument("min_interior_value requires dims >= 3 per axis");
    }
    double m = std::numeric_limits<double>::infinity();
    for(int z = 1; z < v.dims.z - 1; ++z){
        for(int y = 1; y < v.dims.y - 1; ++y){
            for(int x = 1; x < v.dims.x - 1; ++x){
                m = std::min(m, v.at(x, y, z));
            }
        }
    }
    return m;
}

} // namespace dirsynth
