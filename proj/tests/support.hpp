#pragma once

#include <doctest.h>

#include "fixtures.hpp"
