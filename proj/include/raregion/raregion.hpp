#pragma once

#include "raregion/poly.hpp"
#include "raregion/geometry.hpp"
#include "raregion/region.hpp"
#include "raregion/decomposition.hpp"
#include "raregion/momentmap.hpp"
#include "raregion/reeb.hpp"
