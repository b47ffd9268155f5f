// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dimerpa/analysis.hpp"
#include "dimerpa/couplings.hpp"
#include "dimerpa/device.hpp"
#include "dimerpa/errors.hpp"
#include "dimerpa/floquet.hpp"
#include "dimerpa/hybridize.hpp"
#include "dimerpa/inference.hpp"
#include "dimerpa/io.hpp"
#include "dimerpa/meanfield.hpp"
#include "dimerpa/noise.hpp"
#include "dimerpa/response.hpp"
#include "dimerpa/stability.hpp"
#include "dimerpa/synthetic.hpp"
#include "dimerpa/types.hpp"
#include "dimerpa/units.hpp"
