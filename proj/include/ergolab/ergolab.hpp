#pragma once

// Umbrella header for the whole library.

#include "ergolab/circle_map.hpp"
#include "ergolab/common.hpp"
#include "ergolab/entropy.hpp"
#include "ergolab/equilibrium.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/io.hpp"
#include "ergolab/measures.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"
#include "ergolab/srb_like.hpp"
