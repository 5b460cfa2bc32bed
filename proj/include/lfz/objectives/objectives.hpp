#pragma once

#include "lfz/objectives/losses.hpp"
#include "lfz/objectives/metrics.hpp"
#include "lfz/objectives/ssim.hpp"
