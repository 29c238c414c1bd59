#pragma once

#include "flatnet/flat.hpp"
#include "flatnet/lp.hpp"
#include "flatnet/mvee.hpp"
#include "flatnet/predicates.hpp"
#include "flatnet/types.hpp"
#include "flatnet/volume.hpp"
