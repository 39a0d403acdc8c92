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

#include "dirsynth/io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "dirsynth/errors.hpp"

namespace dirsynth {

namespace {

constexpr std::int32_t kHeaderSize = 348;
constexpr double kVoxOffset = 352.0;

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtFloat32 = 16;
constexpr std::int16_t kIntentVector = 1007;

template <class T>
void put(std::vector<char>& buffer, std::size_t offset, T value){
    std::memcpy(buffer.data() + offset, &value, sizeof(T));
}

template <class T>
T get(const std::vector<char>& buffer, std::size_t offset){
    T value;
    std::memcpy(&value, buffer.data() + offset, sizeof(T));
    return value;
}

struct HeaderFields {
    Index3 dims;
    Vec3 spacing;
    Vec3 origin;
    std::int16_t datatype = 0;
    int components = 1;
    double vox_offset = kVoxOffset;
    float scl_slope = 0.0f;
    float scl_inter = 0.0f;
};

std::vector<char> build_header(const HeaderFields& f){
    std::vector<char> h(static_cast<std::size_t>(kHeaderSize) + 4, 0); // header + 4-byte extension flag
    put<std::int32_t>(h, 0, kHeaderSize);

    const bool vector_file = f.components == 3;
    put<std::int16_t>(h, 40, vector_file ? 5 : 3); // dim[0]
    put<std::int16_t>(h, 42, static_cast<std::int16_t>(f.dims.x));
    put<std::int16_t>(h, 44, static_cast<std::int16_t>(f.dims.y));
    put<std::int16_t>(h, 46, static_cast<std::int16_t>(f.dims.z));
    put<std::int16_t>(h, 48, 1);
    put<std::int16_t>(h, 50, static_cast<std::int16_t>(vector_file ? 3 : 1));
    put<std::int16_t>(h, 52, 1);
    put<std::int16_t>(h, 54, 1);

    if(vector_file){
        put<std::int16_t>(h, 68, kIntentVector);
    }
    put<std::int16_t>(h, 70, f.datatype);
    const std::int16_t bitpix = (f.datatype == kDtFloat32) ? 32 : (f.datatype == kDtInt16 ? 16 : 8);
    put<std::int16_t>(h, 72, bitpix);

    put<float>(h, 76, 1.0f); // pixdim[0] (qfac)
    put<float>(h, 80, static_cast<float>(f.spacing.x));
    put<float>(h, 84, static_cast<float>(f.spacing.y));
    put<float>(h, 88, static_cast<float>(f.spacing.z));
    put<float>(h, 92, 1.0f);
    put<float>(h, 96, 1.0f);
    put<float>(h, 100, 1.0f);
    put<float>(h, 104, 1.0f);

    put<float>(h, 108, static_cast<float>(kVoxOffset));
    put<float>(h, 112, 1.0f); // scl_slope
    put<float>(h, 116, 0.0f); // scl_inter
    h[123] = 2;               // xyzt_units: mm

    static const char descrip[] = "dirsynth";
    std::memcpy(h.data() + 148, descrip, sizeof(descrip));

    put<std::int16_t>(h, 252, 1); // qform_code: scanner anat, identity rotation
    put<std::int16_t>(h, 254, 0); // sform unused
    put<float>(h, 268, static_cast<float>(f.origin.x));
    put<float>(h, 272, static_cast<float>(f.origin.y));
    put<float>(h, 276, static_cast<float>(f.origin.z));

    h[344] = 'n';
    h[345] = '+';
    h[346] = '1';
    h[347] = '\0';
    return h;
}

void check_writable_dims(const Index3& dims){
    if(dims.x < 1 || dims.y < 1 || dims.z < 1 ||
       dims.x > 32767 || dims.y > 32767 || dims.z > 32767){
        throw std::invalid_argument("NIfTI dims must be in [1, 32767] per axis");
    }
}

void write_file_atomic(const std::string& path, const std::vector<char>& header,
                       const char* payload, std::size_t payload_bytes){
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if(!out){
            throw std::runtime_error("cannot open for writing: " + tmp);
        }
        out.write(header.data(), static_cast<std::streamsize>(header.size()));
        out.write(payload, static_cast<std::streamsize>(payload_bytes));
        if(!out){
            throw std::runtime_error("write failed: " + tmp);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if(ec){
        throw std::runtime_error("rename failed for " + path + ": " + ec.message());
    }
}

} // namespace

void write_volume(const Volume& v, const std::string& path){
    validate(v);
    check_writable_dims(v.dims);

    HeaderFields f;
    f.dims = v.dims;
    f.spacing = v.spacing;
    f.origin = v.origin;
    f.datatype = kDtFloat32;
    const std::vector<char> header = build_header(f);

    std::vector<float> payload(v.data.size());
    for(std::size_t i = 0; i < v.data.size(); ++i){
        payload[i] = static_cast<float>(v.data[i]);
    }
    write_file_atomic(path, header, reinterpret_cast<const char*>(payload.data()),
                      payload.size() * sizeof(float));
}

void write_labels(const LabelMap& l, const std::string& path){
    validate(l);
    check_writable_dims(l.dims);
    for(const std::int32_t v : l.labels){
        if(v > 32767){
            throw std::invalid_argument("write_labels: label " + std::to_string(v) + " exceeds int16 range");
        }
    }

    HeaderFields f;
    f.dims = l.dims;
    f.spacing = l.spacing;
    f.origin = l.origin;
    f.datatype = kDtInt16;
    const std::vector<char> header = build_header(f);

    std::vector<std::int16_t> payload(l.labels.size());
    for(std::size_t i = 0; i < l.labels.size(); ++i){
        payload[i] = static_cast<std::int16_t>(l.labels[i]);
    }
    write_file_atomic(path, header, reinterpret_cast<const char*>(payload.data()),
                      payload.size() * sizeof(std::int16_t));
}

void write_mask(const Index3& dims, const Vec3& spacing, const Vec3& origin,
                const std::vector<std::uint8_t>& mask, const std::string& path){
    check_writable_dims(dims);
    if(mask.size() != voxel_count(dims)){
        throw std::invalid_argument("write_mask: mask length does not match dims");
    }

    HeaderFields f;
    f.dims = dims;
    f.spacing = spacing;
    f.origin = origin;
    f.datatype = kDtUint8;
    const std::vector<char> header = build_header(f);

    std::vector<std::uint8_t> payload(mask.size());
    for(std::size_t i = 0; i < mask.size(); ++i){
        payload[i] = (mask[i] != 0) ? 1 : 0;
    }
    write_file_atomic(path, header, reinterpret_cast<const char*>(payload.data()), payload.size());
}

void write_displacement(const DisplacementField& u, const std::string& path){
    check_writable_dims(u.dims);
    if(u.vectors.size() != u.voxel_count()){
        throw std::invalid_argument("write_displacement: vector count does not match dims");
    }

    HeaderFields f;
    f.dims = u.dims;
    f.spacing = u.spacing;
    f.origin = Vec3{};
    f.datatype = kDtFloat32;
    f.components = 3;
    const std::vector<char> header = build_header(f);

    // component-planar layout (x plane, y plane, z plane), voxel -> mm
    const std::size_t n = u.vectors.size();
    std::vector<float> payload(3 * n);
    for(std::size_t i = 0; i < n; ++i){
        payload[i] = static_cast<float>(u.vectors[i].x * u.spacing.x);
        payload[n + i] = static_cast<float>(u.vectors[i].y * u.spacing.y);
        payload[2 * n + i] = static_cast<float>(u.vectors[i].z * u.spacing.z);
    }
    write_file_atomic(path, header, reinterpret_cast<const char*>(payload.data()),
                      payload.size() * sizeof(float));
}

LoadedImage read_volume(const std::string& path){
    std::ifstream in(path, std::ios::binary);
    if(!in){
        throw std::invalid_argument("cannot open file: " + path);
    }
    std::vector<char> header(kHeaderSize);
    in.read(header.data(), kHeaderSize);
    if(in.gcount() != kHeaderSize){
        throw CorruptFileError(path + ": file shorter than a NIfTI-1 header");
    }

    if(header[344] != 'n' || header[345] != '+' || header[346] != '1' || header[347] != '\0'){
        throw FormatError(path + ": bad NIfTI magic (expected single-file \"n+1\")");
    }
    const auto sizeof_hdr = get<std::int32_t>(header, 0);
    if(sizeof_hdr != kHeaderSize){
        throw UnsupportedFormatError(path + ": unsupported header size (byte-swapped or NIfTI-2 input?)");
    }

    const auto ndim = get<std::int16_t>(header, 40);
    HeaderFields f;
    f.dims = Index3{get<std::int16_t>(header, 42), get<std::int16_t>(header, 44), get<std::int16_t>(header, 46)};
    f.datatype = get<std::int16_t>(header, 70);
    f.spacing = Vec3{get<float>(header, 80), get<float>(header, 84), get<float>(header, 88)};
    f.origin = Vec3{get<float>(header, 268), get<float>(header, 272), get<float>(header, 276)};
    f.vox_offset = get<float>(header, 108);
    f.scl_slope = get<float>(header, 112);
    f.scl_inter = get<float>(header, 116);
    f.components = 1;

    if(f.dims.x < 1 || f.dims.y < 1 || f.dims.z < 1){
        throw CorruptFileError(path + ": non-positive dims");
    }
    if(!(f.spacing.x > 0.0) || !(f.spacing.y > 0.0) || !(f.spacing.z > 0.0)){
        throw CorruptFileError(path + ": non-positive pixdim");
    }
    if(ndim == 5){
        const auto dim5 = get<std::int16_t>(header, 50);
        const auto dim4 = get<std::int16_t>(header, 48);
        if(dim4 != 1 || dim5 != 3){
            throw UnsupportedFormatError(path + ": only 3-component dim[5]=3 vector images are supported");
        }
        f.components = 3;
    }else if(ndim != 3){
        throw UnsupportedFormatError(path + ": only 3D scalar or 3-component vector images are supported");
    }
    if(f.datatype != kDtUint8 && f.datatype != kDtInt16 && f.datatype != kDtFloat32){
        throw UnsupportedFormatError(path + ": unsupported datatype code " + std::to_string(f.datatype));
    }
    if(f.components == 3 && f.datatype != kDtFloat32){
        throw UnsupportedFormatError(path + ": vector images must be float32");
    }
    if(f.vox_offset < kHeaderSize){
        throw CorruptFileError(path + ": vox_offset inside the header");
    }

    const std::size_t n = voxel_count(f.dims) * static_cast<std::size_t>(f.components);
    const std::size_t elem_size = (f.datatype == kDtFloat32) ? 4 : (f.datatype == kDtInt16 ? 2 : 1);
    in.seekg(static_cast<std::streamoff>(f.vox_offset), std::ios::beg);
    std::vector<char> raw(n * elem_size);
    in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if(static_cast<std::size_t>(in.gcount()) != raw.size()){
        throw CorruptFileError(path + ": truncated voxel data");
    }

    const bool scaled = (f.scl_slope != 0.0f) && !(f.scl_slope == 1.0f && f.scl_inter == 0.0f);
    auto scale = [&](double v){
        return scaled ? (static_cast<double>(f.scl_slope) * v + static_cast<double>(f.scl_inter)) : v;
    };

    if(f.components == 3){
        DisplacementField u;
        u.dims = f.dims;
        u.spacing = f.spacing;
        u.vectors.resize(voxel_count(f.dims));
        const float* data = reinterpret_cast<const float*>(raw.data());
        const std::size_t nv = u.vectors.size();
        for(std::size_t i = 0; i < nv; ++i){
            // stored in mm; internal displacement unit is voxels
            u.vectors[i].x = scale(data[i]) / f.spacing.x;
            u.vectors[i].y = scale(data[nv + i]) / f.spacing.y;
            u.vectors[i].z = scale(data[2 * nv + i]) / f.spacing.z;
        }
        return u;
    }

    if(f.datatype == kDtFloat32){
        Volume v;
        v.dims = f.dims;
        v.spacing = f.spacing;
        v.origin = f.origin;
        v.data.resize(n);
        const float* data = reinterpret_cast<const float*>(raw.data());
        for(std::size_t i = 0; i < n; ++i){
            v.data[i] = scale(static_cast<double>(data[i]));
        }
        validate(v);
        return v;
    }

    // integer data: label map when unscaled, intensity volume when scaled
    auto read_int = [&](std::size_t i) -> std::int32_t {
        if(f.datatype == kDtInt16){
            return reinterpret_cast<const std::int16_t*>(raw.data())[i];
        }
        return reinterpret_cast<const std::uint8_t*>(raw.data())[i];
    };
    if(scaled){
        Volume v;
        v.dims = f.dims;
        v.spacing = f.spacing;
        v.origin = f.origin;
        v.data.resize(n);
        for(std::size_t i = 0; i < n; ++i){
            v.data[i] = scale(static_cast<double>(read_int(i)));
        }
        validate(v);
        return v;
    }
    LabelMap l;
    l.dims = f.dims;
    l.spacing = f.spacing;
    l.origin = f.origin;
    l.labels.resize(n);
    for(std::size_t i = 0; i < n; ++i){
        const std::int32_t value = read_int(i);
        if(value < 0){
            throw CorruptFileError(path + ": negative values in integer label image");
        }
        l.labels[i] = value;
    }
    l.recompute_label_set();
    return l;
}

Volume read_as_volume(const std::string& path){
    LoadedImage img = read_volume(path);
    if(auto* v = std::get_if<Volume>(&img)){
        return std::move(*v);
    }
    if(auto* l = std::get_if<LabelMap>(&img)){
        // integer-valued intensity images are fine to promote
        Volume v;
        v.dims = l->dims;
        v.spacing = l->spacing;
        v.origin = l->origin;
        v.data.assign(l->labels.begin(), l->labels.end());
        return v;
    }
    throw std::invalid_argument(path + ": expected a scalar volume, found a displacement field");
}

LabelMap read_as_labels(const std::string& path){
    LoadedImage img = read_volume(path);
    if(auto* l = std::get_if<LabelMap>(&img)){
        return std::move(*l);
    }
    throw std::invalid_argument(path + ": expected an integer label map");
}

DisplacementField read_as_displacement(const std::string& path){
    LoadedImage img = read_volume(path);
    if(auto* u = std::get_if<DisplacementField>(&img)){
        return std::move(*u);
    }
    throw std::invalid_argument(path + ": expected a 3-component displacement field");
}

std::vector<std::uint8_t> read_as_mask(const std::string& path){
    LabelMap l = read_as_labels(path);
    std::vector<std::uint8_t> mask(l.labels.size());
    for(std::size_t i = 0; i < mask.size(); ++i){
        mask[i] = (l.labels[i] != 0) ? 1 : 0;
    }
    return mask;
}

void write_text_file(const std::string& path, const std::string& content){
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if(!out){
            throw std::runtime_error("cannot open for writing: " + tmp);
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if(!out){
            throw std::runtime_error("write failed: " + tmp);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if(ec){
        throw std::runtime_error("rename failed for " + path + ": " + ec.message());
    }
}

std::string format_double(double value){
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

} // namespace dirsynth
