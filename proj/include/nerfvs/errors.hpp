// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace nerfvs {

/// Invalid parameters or configuration supplied by the caller.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed, missing or inconsistent input data (files, meshes, rasters).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A documented precondition of a numerical routine was violated.
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Training produced a non-finite loss.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nerfvs
