#pragma once

// Umbrella header pulling in the whole laboratory.

#include "fraclab/exponents.hpp"
#include "fraclab/fractional_operator.hpp"
#include "fraclab/geometry.hpp"
#include "fraclab/hclass.hpp"
#include "fraclab/io.hpp"
#include "fraclab/lipschitz.hpp"
#include "fraclab/params.hpp"
#include "fraclab/quadrature.hpp"
#include "fraclab/region.hpp"
#include "fraclab/rng.hpp"
#include "fraclab/sample_plan.hpp"
#include "fraclab/verify.hpp"
#include "fraclab/weights.hpp"
