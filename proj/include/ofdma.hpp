/*
 * Copyright 2026 The ofdma-maxmin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "ofdma/error.hpp"
#include "ofdma/format.hpp"
#include "ofdma/io.hpp"
#include "ofdma/lp.hpp"
#include "ofdma/matrix.hpp"
#include "ofdma/maxmin.hpp"
#include "ofdma/rates.hpp"
#include "ofdma/rng.hpp"
#include "ofdma/services.hpp"
#include "ofdma/sim.hpp"
#include "ofdma/two_user.hpp"
#include "ofdma/version.hpp"
