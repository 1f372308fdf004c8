#pragma once

#include "gamow/errors.hpp"
#include "gamow/numerics.hpp"
#include "gamow/scattering.hpp"
#include "gamow/poles.hpp"
#include "gamow/packets.hpp"
#include "gamow/states.hpp"
#include "gamow/spectral.hpp"
#include "gamow/density.hpp"
#include "gamow/expansion.hpp"
