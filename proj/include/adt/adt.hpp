#pragma once

#include "adt/applications.hpp"
#include "adt/canonical.hpp"
#include "adt/coupling_io.hpp"
#include "adt/couplings.hpp"
#include "adt/error.hpp"
#include "adt/fixtures.hpp"
#include "adt/ot.hpp"
#include "adt/payoff.hpp"
#include "adt/process.hpp"
#include "adt/rational.hpp"
#include "adt/skorokhod.hpp"
#include "adt/transport.hpp"
#include "adt/tree_io.hpp"
