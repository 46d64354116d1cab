#pragma once

#include "contamination.hpp"
#include "distribution.hpp"
#include "error.hpp"
#include "inference.hpp"
#include "limit_law.hpp"
#include "monotone_map.hpp"
#include "normal.hpp"
#include "random.hpp"
#include "sample.hpp"
#include "simulation.hpp"
#include "two_sample.hpp"
