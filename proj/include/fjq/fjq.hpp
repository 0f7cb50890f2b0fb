#pragma once

#include "fjq/asymptotics.hpp"
#include "fjq/dist.hpp"
#include "fjq/dist_json.hpp"
#include "fjq/error.hpp"
#include "fjq/lundberg.hpp"
#include "fjq/rng.hpp"
#include "fjq/sample_io.hpp"
#include "fjq/sim.hpp"
#include "fjq/standardize.hpp"
#include "fjq/stats.hpp"
#include "fjq/verify.hpp"
