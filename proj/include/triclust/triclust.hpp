#pragma once

#include "triclust/bench.hpp"
#include "triclust/combinat.hpp"
#include "triclust/error.hpp"
#include "triclust/inference.hpp"
#include "triclust/io.hpp"
#include "triclust/kernel.hpp"
#include "triclust/matrix.hpp"
#include "triclust/normal.hpp"
#include "triclust/parallel.hpp"
#include "triclust/partition.hpp"
#include "triclust/rng.hpp"
#include "triclust/search.hpp"
#include "triclust/ustat.hpp"
#include "triclust/variance.hpp"
#include "triclust/version.hpp"
