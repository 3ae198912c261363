#pragma once

#include "tfbs/compare.hpp"
#include "tfbs/errors.hpp"
#include "tfbs/estimation.hpp"
#include "tfbs/fbm.hpp"
#include "tfbs/finite_difference.hpp"
#include "tfbs/greeks.hpp"
#include "tfbs/hedging.hpp"
#include "tfbs/model.hpp"
#include "tfbs/normal.hpp"
#include "tfbs/pde.hpp"
