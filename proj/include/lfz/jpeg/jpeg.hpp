#pragma once

#include "lfz/jpeg/config.hpp"
#include "lfz/jpeg/decoder.hpp"
#include "lfz/jpeg/encoder.hpp"
#include "lfz/jpeg/tables.hpp"
