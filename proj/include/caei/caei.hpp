#pragma once

#include "caei/rational.hpp"
#include "caei/simplex.hpp"
#include "caei/linear_system.hpp"
#include "caei/model.hpp"
#include "caei/divisible.hpp"
#include "caei/discrete.hpp"
#include "caei/verify.hpp"
#include "caei/cake.hpp"
#include "caei/io.hpp"
#include "caei/generate.hpp"
