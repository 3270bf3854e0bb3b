#pragma once

#include "wsnsched/types.hpp"
#include "wsnsched/topology.hpp"
#include "wsnsched/workload.hpp"
#include "wsnsched/resources.hpp"
#include "wsnsched/simulator.hpp"
#include "wsnsched/greedy.hpp"
#include "wsnsched/gabas.hpp"
#include "wsnsched/oracle.hpp"
#include "wsnsched/harness.hpp"
