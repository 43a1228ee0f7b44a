#pragma once

#include "qoscache/model.hpp"
#include "qoscache/bounds.hpp"
#include "qoscache/centralized_small.hpp"
#include "qoscache/centralized_layered.hpp"
#include "qoscache/decentralized.hpp"
#include "qoscache/bitsim.hpp"
#include "qoscache/sweep.hpp"
