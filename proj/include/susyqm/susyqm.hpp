#pragma once

#include "susyqm/calculus.hpp"
#include "susyqm/catalog.hpp"
#include "susyqm/errors.hpp"
#include "susyqm/grid.hpp"
#include "susyqm/model.hpp"
#include "susyqm/params.hpp"
#include "susyqm/riccati.hpp"
#include "susyqm/shape_invariance.hpp"
#include "susyqm/spectra.hpp"
