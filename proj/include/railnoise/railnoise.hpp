#pragma once

#include "railnoise/beam.hpp"
#include "railnoise/config.hpp"
#include "railnoise/errors.hpp"
#include "railnoise/noise_spectrum.hpp"
#include "railnoise/phase_noise.hpp"
#include "railnoise/suspension.hpp"
