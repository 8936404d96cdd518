// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <random>
#include <string>

#ifndef EINSTALL_SOURCE_DIR
#error "EINSTALL_SOURCE_DIR must be defined"
#endif

namespace einstall::test {

inline std::filesystem::path source_dir() { return EINSTALL_SOURCE_DIR; }

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("einstall_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Ingests capsules/mc_src once per process and returns the capsule directory.
std::filesystem::path fixture_capsule_dir();

}  // namespace einstall::test
