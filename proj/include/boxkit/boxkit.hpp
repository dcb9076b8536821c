#pragma once

#include "boxkit/box.hpp"
#include "boxkit/errors.hpp"
#include "boxkit/locality.hpp"
#include "boxkit/rational.hpp"
#include "boxkit/search.hpp"
#include "boxkit/serialize.hpp"
#include "boxkit/simplex.hpp"
#include "boxkit/wiring.hpp"
