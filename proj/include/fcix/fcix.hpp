#pragma once

// Umbrella header for the chaos-index analysis library.

#include "fcix/common.hpp"
#include "fcix/dynamics.hpp"
#include "fcix/entropy.hpp"
#include "fcix/errors.hpp"
#include "fcix/fracts.hpp"
#include "fcix/io.hpp"
#include "fcix/panel.hpp"
#include "fcix/pipeline.hpp"
#include "fcix/rpcm.hpp"
#include "fcix/rpct.hpp"
#include "fcix/segment.hpp"
#include "fcix/version.hpp"
