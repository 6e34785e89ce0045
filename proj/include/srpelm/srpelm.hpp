#pragma once

#include "srpelm/bench.hpp"
#include "srpelm/csv.hpp"
#include "srpelm/dataset.hpp"
#include "srpelm/diagnostics.hpp"
#include "srpelm/elm.hpp"
#include "srpelm/error.hpp"
#include "srpelm/features.hpp"
#include "srpelm/jaccard.hpp"
#include "srpelm/kernel.hpp"
#include "srpelm/keyvalue.hpp"
#include "srpelm/logreg.hpp"
#include "srpelm/metrics.hpp"
#include "srpelm/parallel.hpp"
#include "srpelm/persistence.hpp"
#include "srpelm/random.hpp"
#include "srpelm/ridge.hpp"
#include "srpelm/sparse_matrix.hpp"
#include "srpelm/srp.hpp"
