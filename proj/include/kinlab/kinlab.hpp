#pragma once

// Everything except the lab runner layer.
#include "coefficients.hpp"
#include "convolution.hpp"
#include "covering.hpp"
#include "degiorgi.hpp"
#include "diffusion.hpp"
#include "distance.hpp"
#include "error.hpp"
#include "fractional.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "kernel.hpp"
#include "kinetic_fp.hpp"
#include "linear_solver.hpp"
#include "parallel.hpp"
#include "raster.hpp"
#include "residual.hpp"
#include "rng.hpp"
