#pragma once

// Umbrella header: finite-distribution core, erasure source model,
// extractor adversary constructions, quantum measurement simulation and the
// Santha-Vazirani bridge.

#include "weakrand/adversary.hpp"
#include "weakrand/alphabet.hpp"
#include "weakrand/distribution.hpp"
#include "weakrand/extractor.hpp"
#include "weakrand/io.hpp"
#include "weakrand/numeric.hpp"
#include "weakrand/quantum.hpp"
#include "weakrand/source.hpp"
#include "weakrand/sv_bridge.hpp"
