#pragma once

#include "lhd/benchmark.hpp"
#include "lhd/constructions.hpp"
#include "lhd/criteria.hpp"
#include "lhd/csv.hpp"
#include "lhd/design.hpp"
#include "lhd/error.hpp"
#include "lhd/io.hpp"
#include "lhd/rng.hpp"
#include "lhd/search.hpp"
