#pragma once

#include "randent/analysis.hpp"
#include "randent/entmeas.hpp"
#include "randent/errors.hpp"
#include "randent/gatelib.hpp"
#include "randent/paulichain.hpp"
#include "randent/protocol.hpp"
#include "randent/qsim.hpp"
#include "randent/spectral.hpp"

namespace randent {

inline constexpr const char *kVersion = "0.1.0";

} // namespace randent
