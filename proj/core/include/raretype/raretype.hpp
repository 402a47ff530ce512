#pragma once

#include "raretype/error.hpp"
#include "raretype/inference.hpp"
#include "raretype/io.hpp"
#include "raretype/likelihood_ratio.hpp"
#include "raretype/partition.hpp"
#include "raretype/pitman.hpp"
#include "raretype/random.hpp"
#include "raretype/workbench.hpp"
