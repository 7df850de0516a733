#pragma once

#include "mitoeval/agreement.hpp"
#include "mitoeval/consensus.hpp"
#include "mitoeval/detection.hpp"
#include "mitoeval/errors.hpp"
#include "mitoeval/fusion.hpp"
#include "mitoeval/io.hpp"
#include "mitoeval/manifest.hpp"
#include "mitoeval/random.hpp"
#include "mitoeval/sim.hpp"
#include "mitoeval/types.hpp"
