#pragma once

#include "treeflow/centrality.hpp"
#include "treeflow/convex.hpp"
#include "treeflow/descent.hpp"
#include "treeflow/energy.hpp"
#include "treeflow/errors.hpp"
#include "treeflow/experiments.hpp"
#include "treeflow/instances.hpp"
#include "treeflow/io.hpp"
#include "treeflow/network.hpp"
#include "treeflow/tree.hpp"
