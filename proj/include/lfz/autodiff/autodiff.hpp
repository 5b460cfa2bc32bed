#pragma once

#include "lfz/autodiff/conv.hpp"
#include "lfz/autodiff/filter.hpp"
#include "lfz/autodiff/graph.hpp"
#include "lfz/autodiff/norm.hpp"
#include "lfz/autodiff/ops.hpp"
#include "lfz/autodiff/optim.hpp"
#include "lfz/autodiff/sampling.hpp"
#include "lfz/autodiff/tensor.hpp"
