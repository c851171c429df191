#pragma once

#include "escape_lab/errors.hpp"
#include "escape_lab/estimators.hpp"
#include "escape_lab/format.hpp"
#include "escape_lab/maps.hpp"
#include "escape_lab/montecarlo.hpp"
#include "escape_lab/parallel.hpp"
#include "escape_lab/partition.hpp"
#include "escape_lab/reference_values.hpp"
#include "escape_lab/spectral.hpp"
#include "escape_lab/substochastic.hpp"
#include "escape_lab/system.hpp"
#include "escape_lab/transition.hpp"
