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

#include <cmath>
#include <map>
#include <stdexcept>

#include "doctest.h"

#include "dirsynth/phantom.hpp"
#include "test_helpers.hpp"

using namespace dirsynth;
using namespace dirsynth::testing;

namespace {

PhantomSpec small_spec(){
    PhantomSpec spec;
    spec.dims = Index3{32, 32, 32};
    spec.seed = 5;
    spec.structures.count = 1;
    spec.structures.min_radius_vox = 3.0;
    spec.structures.max_radius_vox = 5.0;
    spec.deformation.smoothness_vox = 4.0;
    spec.deformation.max_magnitude_vox = 3.0;
    spec.noise_sigma = 0.0;
    return spec;
}

} // namespace

TEST_CASE("phantom generation is deterministic under the seed"){
    const PhantomSpec spec = small_spec();
    const PhantomSubject a = generate(spec);
    const PhantomSubject b = generate(spec);
    CHECK(a.tissue_map.labels == b.tissue_map.labels);
    CHECK(a.mask == b.mask);
    REQUIRE(a.contrasts.count("csfn") == 1);
    REQUIRE(a.contrasts.count("wmn") == 1);
    CHECK(a.contrasts.at("csfn").data == b.contrasts.at("csfn").data);
    CHECK(a.contrasts.at("wmn").data == b.contrasts.at("wmn").data);
}

TEST_CASE("noiseless contrasts equal the tissue IR values pointwise"){
    PhantomSpec spec = small_spec();
    const PhantomSubject subject = generate(spec);
    const auto tissues = default_tissues();

    std::map<std::int32_t, double> wmn_expected, csfn_expected;
    for(const TissueSpec& t : tissues){
        wmn_expected[t.label] = ir_signal({t.m0, t.t1_ms, 400.0});
        csfn_expected[t.label] = ir_signal({t.m0, t.t1_ms, 1400.0});
    }
    const Volume& wmn = subject.contrasts.at("wmn");
    const Volume& csfn = subject.contrasts.at("csfn");
    for(std::size_t i = 0; i < subject.tissue_map.labels.size(); ++i){
        const std::int32_t label = subject.tissue_map.labels[i];
        const double expected_wmn = (label == 0) ? 0.0 : wmn_expected.at(label);
        const double expected_csfn = (label == 0) ? 0.0 : csfn_expected.at(label);
        REQUIRE(wmn.data[i] == expected_wmn);
        REQUIRE(csfn.data[i] == expected_csfn);
    }
}

TEST_CASE("a tissue at the WMn null point vanishes at TI 400 only"){
    PhantomSpec spec = small_spec();
    spec.tissues = default_tissues();
    spec.tissues.push_back({"nulled", 5, 1.0, 400.0 / std::log(2.0)});
    const PhantomSubject subject = generate(spec);

    bool saw_label = false;
    const Volume& wmn = subject.contrasts.at("wmn");
    const Volume& csfn = subject.contrasts.at("csfn");
    for(std::size_t i = 0; i < subject.tissue_map.labels.size(); ++i){
        if(subject.tissue_map.labels[i] == 5){
            saw_label = true;
            CHECK(std::fabs(wmn.data[i]) < 1e-12);
            CHECK(csfn.data[i] > 0.5);
        }
    }
    CHECK(saw_label);
}

TEST_CASE("deform_subject edge cases and ground-truth invertibility"){
    const PhantomSpec spec = small_spec();
    const PhantomSubject base = generate(spec);

    SUBCASE("zero magnitude leaves the subject unchanged with a zero truth field"){
        DeformationSpec none;
        none.max_magnitude_vox = 0.0;
        const PhantomSubject out = deform_subject(base, none, 17);
        CHECK(out.tissue_map.labels == base.tissue_map.labels);
        CHECK(out.contrasts.at("wmn").data == base.contrasts.at("wmn").data);
        REQUIRE(out.true_displacement.has_value());
        CHECK(max_vector_norm(*out.true_displacement) == 0.0);
    }

    SUBCASE("deformed subjects carry an invertibility-safe truth field"){
        DeformationSpec strong;
        strong.smoothness_vox = 4.0;
        strong.max_magnitude_vox = 3.5;
        const PhantomSubject out = deform_subject(base, strong, 19);
        REQUIRE(out.true_displacement.has_value());
        CHECK(max_vector_norm(*out.true_displacement) > 1.0);
        const Volume det = jacobian_determinant(*out.true_displacement);
        CHECK(min_interior_value(det) > 0.0);
    }

    SUBCASE("label volume change is bounded by the Jacobian extremes"){
        DeformationSpec medium;
        medium.smoothness_vox = 5.0;
        medium.max_magnitude_vox = 3.0;
        const PhantomSubject out = deform_subject(base, medium, 23);
        const Volume det = jacobian_determinant(*out.true_displacement);
        double j_min = std::numeric_limits<double>::infinity();
        double j_max = 0.0;
        for(const double d : det.data){
            j_min = std::min(j_min, d);
            j_max = std::max(j_max, d);
        }
        for(const std::int32_t label : base.tissue_map.label_set){
            if(label == 0){ continue; }
            double before = 0.0, after = 0.0;
            for(std::size_t i = 0; i < base.tissue_map.labels.size(); ++i){
                before += (base.tissue_map.labels[i] == label) ? 1.0 : 0.0;
                after += (out.tissue_map.labels[i] == label) ? 1.0 : 0.0;
            }
            REQUIRE(before > 0.0);
            const double ratio = after / before;
            // pulling labels through the warp scales volumes by the inverse
            // Jacobian, within a slack for the discrete voxel count
            CHECK(ratio > 0.8 / j_max);
            CHECK(ratio < 1.2 / j_min);
        }
    }
}

TEST_CASE("cohorts share anatomy but differ in deformation"){
    PhantomSpec spec = small_spec();
    const auto cohort = generate_cohort(spec, 3);
    REQUIRE(cohort.size() == 3);

    SUBCASE("pairwise distinct truth fields"){
        for(std::size_t i = 0; i < cohort.size(); ++i){
            for(std::size_t j = i + 1; j < cohort.size(); ++j){
                const double diff = max_field_difference(cohort[i].true_displacement->vectors,
                                                         cohort[j].true_displacement->vectors);
                CHECK(diff > 0.0);
            }
        }
    }
    SUBCASE("regeneration is bit identical"){
        const auto again = generate_cohort(spec, 3);
        for(std::size_t i = 0; i < cohort.size(); ++i){
            CHECK(cohort[i].tissue_map.labels == again[i].tissue_map.labels);
            CHECK(cohort[i].contrasts.at("wmn").data == again[i].contrasts.at("wmn").data);
        }
    }
    SUBCASE("singleton cohort works"){
        CHECK(generate_cohort(spec, 1).size() == 1);
        CHECK_THROWS_AS(generate_cohort(spec, 0), std::invalid_argument);
    }
}

TEST_CASE("phantom spec validation"){
    PhantomSpec spec = small_spec();

    SUBCASE("dims below 32 are rejected"){
        spec.dims = Index3{16, 32, 32};
        CHECK_THROWS_AS(validate(spec), std::invalid_argument);
    }
    SUBCASE("deformation beyond dims/8 is rejected"){
        spec.deformation.max_magnitude_vox = 5.0; // 32/8 = 4
        CHECK_THROWS_AS(validate(spec), std::invalid_argument);
    }
    SUBCASE("duplicate tissue t1 values are rejected"){
        spec.tissues = default_tissues();
        spec.tissues.push_back({"dup", 9, 1.0, 800.0});
        CHECK_THROWS_AS(validate(spec), std::invalid_argument);
    }
}

TEST_CASE("to_atlas_subject exposes every contrast and the labels"){
    const PhantomSubject subject = generate(small_spec());
    const AtlasSubject atlas = to_atlas_subject(subject, "s0");
    CHECK(atlas.id == "s0");
    CHECK(atlas.primary_contrast.data == subject.contrasts.at("csfn").data);
    CHECK(atlas.secondary_contrasts.count("wmn") == 1);
    CHECK(atlas.secondary_contrasts.count("csfn") == 1);
    REQUIRE(atlas.labels.has_value());
    CHECK(atlas.labels->labels == subject.tissue_map.labels);
    CHECK_THROWS_AS(to_atlas_subject(subject, "s1", "t2w"), std::invalid_argument);
}
