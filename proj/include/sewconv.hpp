#pragma once

#include "sewconv/core.hpp"
#include "sewconv/diagnostics.hpp"
#include "sewconv/nonlinear.hpp"
#include "sewconv/paths.hpp"
#include "sewconv/scale.hpp"
#include "sewconv/sewing.hpp"
#include "sewconv/simplex.hpp"
#include "sewconv/solver.hpp"
#include "sewconv/young.hpp"
