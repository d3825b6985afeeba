// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nerfvs/adam.hpp"
#include "nerfvs/bvh.hpp"
#include "nerfvs/camera.hpp"
#include "nerfvs/checkpoint.hpp"
#include "nerfvs/dataset.hpp"
#include "nerfvs/errors.hpp"
#include "nerfvs/evaluation.hpp"
#include "nerfvs/field_render.hpp"
#include "nerfvs/losses.hpp"
#include "nerfvs/mesh.hpp"
#include "nerfvs/metrics.hpp"
#include "nerfvs/parallel.hpp"
#include "nerfvs/pipeline.hpp"
#include "nerfvs/raster.hpp"
#include "nerfvs/renderer.hpp"
#include "nerfvs/scaffold.hpp"
#include "nerfvs/scene.hpp"
#include "nerfvs/sh.hpp"
#include "nerfvs/trainer.hpp"
#include "nerfvs/vec.hpp"
#include "nerfvs/voxel_grid.hpp"
