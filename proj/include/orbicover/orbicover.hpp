// Umbrella header.
#pragma once

#include "orbicover/certify.hpp"
#include "orbicover/cli.hpp"
#include "orbicover/errors.hpp"
#include "orbicover/finfield.hpp"
#include "orbicover/fp_poly.hpp"
#include "orbicover/intfactor.hpp"
#include "orbicover/matgroup.hpp"
#include "orbicover/numfield.hpp"
#include "orbicover/orders.hpp"
#include "orbicover/quadform.hpp"
