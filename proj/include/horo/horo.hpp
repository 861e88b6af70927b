#pragma once

#include "horo/continuation.hpp"
#include "horo/families.hpp"
#include "horo/geometry.hpp"
#include "horo/grid.hpp"
#include "horo/io.hpp"
#include "horo/linalg.hpp"
#include "horo/newton.hpp"
#include "horo/problem.hpp"
#include "horo/verify.hpp"
