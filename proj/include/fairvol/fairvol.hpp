#pragma once

#include "errors.hpp"
#include "rng.hpp"
#include "quadrature.hpp"
#include "special.hpp"
#include "simulate.hpp"
#include "estimate.hpp"
#include "stats.hpp"
#include "pipeline.hpp"
