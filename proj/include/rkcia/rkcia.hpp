#ifndef RKCIA_RKCIA_HPP
#define RKCIA_RKCIA_HPP

#include "rkcia/graph.hpp"
#include "rkcia/paths.hpp"
#include "rkcia/subsets.hpp"
#include "rkcia/dsep.hpp"
#include "rkcia/indep.hpp"
#include "rkcia/algorithm.hpp"
#include "rkcia/harness.hpp"
#include "rkcia/io.hpp"

#endif
