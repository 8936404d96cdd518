// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <unistd.h>

#include "einstall/content_capsule.hpp"

namespace einstall::test {

std::filesystem::path fixture_capsule_dir() {
    static const std::filesystem::path dir = [] {
        auto out = scratch_dir("mc_capsule_" + std::to_string(::getpid()));
        ingest_directory(source_dir() / "capsules" / "mc_src", out);
        return out;
    }();
    return dir;
}

}  // namespace einstall::test
