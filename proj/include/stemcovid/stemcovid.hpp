#pragma once

#include "stemcovid/errors.hpp"
#include "stemcovid/fusion_art.hpp"
#include "stemcovid/harness.hpp"
#include "stemcovid/io.hpp"
#include "stemcovid/memory.hpp"
#include "stemcovid/rng.hpp"
#include "stemcovid/search.hpp"
#include "stemcovid/sim.hpp"
