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

#include <filesystem>
#include <fstream>

#include "doctest.h"

#include <json.hpp>

#include "dirsynth/io.hpp"
#include "dirsynth/metrics.hpp"
#include "dirsynth/transform.hpp"
#include "subprocess_helpers.hpp"

using namespace dirsynth;
using namespace dirsynth::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = DIRSYNTH_CLI_PATH;

fs::path scratch(const std::string& name){
    const fs::path dir = fs::temp_directory_path() / "dirsynth_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string phantom_cmd(const fs::path& out, int n, int seed = 7){
    return kCli + " phantom --n " + std::to_string(n) + " --dims 32 --structures 4" +
           " --min-radius 3 --max-radius 5 --max-magnitude 3 --smoothness 6 --phantom-seed " +
           std::to_string(seed) + " --out " + out.string();
}

} // namespace

TEST_CASE("phantom command writes a complete subject layout"){
    const fs::path dir = scratch("phantom");
    const auto result = run_command(phantom_cmd(dir / "cohort", 1));
    REQUIRE(result.exit_code == 0);
    CHECK(fs::exists(dir / "cohort" / "manifest.json"));
    for(const char* file : {"csfn.nii", "wmn.nii", "labels.nii", "mask.nii", "truth_displacement.nii"}){
        CAPTURE(file);
        CHECK(fs::exists(dir / "cohort" / "subject_000" / file));
    }
}

TEST_CASE("register command on an identity pair"){
    const fs::path dir = scratch("register_identity");
    REQUIRE(run_command(phantom_cmd(dir / "cohort", 1)).exit_code == 0);
    const std::string csfn = (dir / "cohort" / "subject_000" / "csfn.nii").string();
    const std::string labels = (dir / "cohort" / "subject_000" / "labels.nii").string();

    const auto result = run_command(kCli + " register --fixed " + csfn + " --moving " + csfn +
                                    " --fixed-labels " + labels + " --moving-labels " + labels +
                                    " --iterations 20,15,10 --out " + (dir / "reg").string());
    REQUIRE(result.exit_code == 0);

    const DisplacementField u = read_as_displacement((dir / "reg" / "displacement.nii").string());
    CHECK(max_vector_norm(u) < 0.05);
    CHECK(fs::exists(dir / "reg" / "warped.nii"));
    CHECK(fs::exists(dir / "reg" / "warped_labels.nii"));
    CHECK(fs::exists(dir / "reg" / "loss_trace.csv"));
    CHECK(fs::exists(dir / "reg" / "summary.json"));
}

TEST_CASE("missing inputs exit with the validation code"){
    const fs::path dir = scratch("validation");
    const auto result = run_command(kCli + " register --fixed /nope/fixed.nii --moving /nope/moving.nii --out " +
                                    (dir / "reg").string());
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("/nope/fixed.nii") != std::string::npos);
}

TEST_CASE("eval command identities and degenerate input"){
    const fs::path dir = scratch("eval");
    REQUIRE(run_command(phantom_cmd(dir / "cohort", 1)).exit_code == 0);
    const std::string csfn = (dir / "cohort" / "subject_000" / "csfn.nii").string();
    const std::string mask = (dir / "cohort" / "subject_000" / "mask.nii").string();

    SUBCASE("identical inputs give the sentinel psnr and ssim one"){
        const auto result = run_command(kCli + " eval --reference " + csfn + " --test " + csfn +
                                        " --mask " + mask + " --out " + (dir / "m").string());
        REQUIRE(result.exit_code == 0);
        std::ifstream in(dir / "m" / "metrics.csv");
        std::string header, row;
        std::getline(in, header);
        std::getline(in, row);
        CHECK(header == "psnr,ssim,mask_voxels");
        CHECK(row.substr(0, 4) == "inf,");
        CHECK(row.find(",1,") != std::string::npos);
    }

    SUBCASE("degenerate reference without a mask is a validation error"){
        Volume zero = Volume::zeros({32, 32, 32});
        const std::string zero_path = (dir / "zero.nii").string();
        write_volume(zero, zero_path);
        const auto result = run_command(kCli + " eval --reference " + zero_path + " --test " + csfn);
        CHECK(result.exit_code == 2);
    }
}

TEST_CASE("synth command reuses registrations across contrasts"){
    const fs::path dir = scratch("synth");
    REQUIRE(run_command(phantom_cmd(dir / "cohort", 3)).exit_code == 0);
    const fs::path cohort = dir / "cohort";

    const auto result = run_command(
        kCli + " synth --fixed " + (cohort / "subject_000" / "csfn.nii").string() +
        " --fixed-labels " + (cohort / "subject_000" / "labels.nii").string() +
        " --atlases " + (cohort / "manifest.json").string() +
        " --contrasts wmn,csfn --fusion mean --iterations 40,30,20 --out " + (dir / "synth").string());
    REQUIRE(result.exit_code == 0);

    for(const char* contrast : {"wmn", "csfn"}){
        CAPTURE(contrast);
        CHECK(fs::exists(dir / "synth" / (std::string("synthetic_") + contrast + ".nii")));
        std::ifstream in(dir / "synth" / (std::string("fusion_") + contrast + ".json"));
        REQUIRE(in.good());
        json meta;
        in >> meta;
        CHECK(meta.at("registrations_performed").get<std::size_t>() == 3);
        CHECK(meta.at("atlas_ids").size() == 3);
        CHECK(meta.at("registration_ids").size() == 3);
    }
}

TEST_CASE("sweep validation rejects a single atlas"){
    const fs::path dir = scratch("sweep_validation");
    const auto result = run_command(kCli + " sweep --max-atlases 1 --seeds 1,2,3 --dims 32 --out " +
                                    (dir / "s").string());
    CHECK(result.exit_code == 2);
}

TEST_CASE("config file supplies defaults and flags override it"){
    const fs::path dir = scratch("config");
    REQUIRE(run_command(phantom_cmd(dir / "cohort", 1)).exit_code == 0);
    const std::string csfn = (dir / "cohort" / "subject_000" / "csfn.nii").string();
    const std::string labels = (dir / "cohort" / "subject_000" / "labels.nii").string();

    {
        std::ofstream cfg(dir / "run.ini");
        cfg << "[register]\n"
            << "iterations=8,6,4\n"
            << "step-size=0.25\n";
    }

    const std::string base = kCli + " --config " + (dir / "run.ini").string() + " register --fixed " +
                             csfn + " --moving " + csfn + " --fixed-labels " + labels +
                             " --moving-labels " + labels;
    REQUIRE(run_command(base + " --out " + (dir / "a").string()).exit_code == 0);

    // 8+6+4 update budget -> at most (8+1)+(6+1)+(4+1) evaluations plus the
    // adopted-state entries; the config clearly took effect if the trace is tiny
    std::ifstream trace(dir / "a" / "loss_trace.csv");
    std::size_t lines = 0;
    std::string line;
    while(std::getline(trace, line)){
        ++lines;
    }
    CHECK(lines <= 1 + 9 + 7 + 5 + 3);

    // command line wins over the file
    REQUIRE(run_command(base + " --iterations 2,2,2 --out " + (dir / "b").string()).exit_code == 0);
    std::ifstream trace_b(dir / "b" / "loss_trace.csv");
    lines = 0;
    while(std::getline(trace_b, line)){
        ++lines;
    }
    CHECK(lines <= 1 + 3 * 3 + 3);
}

TEST_CASE("rerunning a command reproduces identical bytes"){
    const fs::path dir = scratch("determinism");
    REQUIRE(run_command(phantom_cmd(dir / "c1", 2)).exit_code == 0);
    REQUIRE(run_command(phantom_cmd(dir / "c2", 2)).exit_code == 0);
    CHECK(directories_identical(dir / "c1", dir / "c2"));

    const std::string fixed = (dir / "c1" / "subject_000" / "csfn.nii").string();
    const std::string moving = (dir / "c1" / "subject_001" / "csfn.nii").string();
    const std::string reg_cmd = kCli + " register --fixed " + fixed + " --moving " + moving +
                                " --iterations 20,15,10 --dice-weight 0 --out ";
    REQUIRE(run_command(reg_cmd + (dir / "r1").string()).exit_code == 0);
    REQUIRE(run_command(reg_cmd + (dir / "r2").string()).exit_code == 0);
    CHECK(directories_identical(dir / "r1", dir / "r2"));
}
