#pragma once

#include "amrvns/model.hpp"
#include "amrvns/stochastic.hpp"
#include "amrvns/evaluation.hpp"
#include "amrvns/operators.hpp"
#include "amrvns/vns.hpp"
#include "amrvns/oracle.hpp"
#include "amrvns/io.hpp"
#include "amrvns/cli.hpp"
