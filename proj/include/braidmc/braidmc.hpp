// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

/// @file braidmc.hpp
/// @brief Umbrella header.

#pragma once

#define BRAIDMC_VERSION "0.1.0"

#include <braidmc/analysis.hpp>
#include <braidmc/checkpoint.hpp>
#include <braidmc/common.hpp>
#include <braidmc/compare.hpp>
#include <braidmc/config.hpp>
#include <braidmc/engine.hpp>
#include <braidmc/lattice.hpp>
#include <braidmc/measurement_tree.hpp>
#include <braidmc/oracle.hpp>
#include <braidmc/statistics.hpp>
#include <braidmc/topology.hpp>
#include <braidmc/worldlines.hpp>
