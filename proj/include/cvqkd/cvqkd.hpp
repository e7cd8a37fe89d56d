#pragma once

/**
 * @file cvqkd.hpp
 * @brief Umbrella header: key rates of phase-symmetric continuous-variable
 *        QKD protocols under the beam-splitter attack.
 */

#include "cli.hpp"
#include "infotheory.hpp"
#include "keyrate.hpp"
#include "likelihood.hpp"
#include "mc_validate.hpp"
#include "numerics.hpp"
#include "states.hpp"
#include "version.hpp"
