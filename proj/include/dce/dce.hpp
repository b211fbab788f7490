#pragma once

// Umbrella header.

#include "dce/core_model.hpp"
#include "dce/error.hpp"
#include "dce/harness.hpp"
#include "dce/info_theory.hpp"
#include "dce/max_normal.hpp"
#include "dce/protocols.hpp"
#include "dce/risk.hpp"
#include "dce/rng.hpp"
#include "dce/sdpi_lab.hpp"
#include "dce/serialize.hpp"
