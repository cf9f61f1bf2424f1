#pragma once

// Umbrella header.

#include "geoeval/config.hpp"
#include "geoeval/depth_clean.hpp"
#include "geoeval/error.hpp"
#include "geoeval/geometry.hpp"
#include "geoeval/harness.hpp"
#include "geoeval/image.hpp"
#include "geoeval/io/pfm.hpp"
#include "geoeval/io/ply.hpp"
#include "geoeval/io/png.hpp"
#include "geoeval/io/pose_file.hpp"
#include "geoeval/io/scene_dir.hpp"
#include "geoeval/io/scene_index.hpp"
#include "geoeval/kdtree.hpp"
#include "geoeval/metrics_depth.hpp"
#include "geoeval/metrics_pose.hpp"
#include "geoeval/metrics_recon.hpp"
#include "geoeval/metrics_trajectory.hpp"
#include "geoeval/sampling.hpp"
