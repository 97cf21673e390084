#pragma once

// Umbrella header.
#include "poisson_sharp/bathtub.hpp"
#include "poisson_sharp/cli.hpp"
#include "poisson_sharp/common.hpp"
#include "poisson_sharp/elliptic.hpp"
#include "poisson_sharp/grid_domain.hpp"
#include "poisson_sharp/io.hpp"
#include "poisson_sharp/random_fields.hpp"
#include "poisson_sharp/rearrangement.hpp"
#include "poisson_sharp/scalar_field.hpp"
#include "poisson_sharp/shape_metrics.hpp"
#include "poisson_sharp/sharp_bounds.hpp"
#include "poisson_sharp/spectral.hpp"
