#pragma once

#include "lessketch/diagnostics.hpp"
#include "lessketch/error.hpp"
#include "lessketch/estimators.hpp"
#include "lessketch/generators.hpp"
#include "lessketch/hadamard.hpp"
#include "lessketch/io.hpp"
#include "lessketch/leverage.hpp"
#include "lessketch/leverage_approx.hpp"
#include "lessketch/linalg.hpp"
#include "lessketch/matrix.hpp"
#include "lessketch/newton.hpp"
#include "lessketch/parallel.hpp"
#include "lessketch/rng.hpp"
#include "lessketch/sketch.hpp"
