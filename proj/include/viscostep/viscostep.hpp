#pragma once

// Umbrella include for the whole toolkit.

#include "audit.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "driver.hpp"
#include "errors.hpp"
#include "genvisc.hpp"
#include "integrators.hpp"
#include "maxwell.hpp"
#include "tangent.hpp"
#include "tensor.hpp"
