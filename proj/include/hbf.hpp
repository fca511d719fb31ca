// SPDX-License-Identifier: Apache-2.0
//
// hbfsim: hybrid analog/digital beamforming from implicit CSI for mmWave MIMO-OFDM links
// Copyright (C) 2026 The hbfsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef HBF_HPP
#define HBF_HPP

#include "hbf/errors.hpp"
#include "hbf/matkernel.hpp"
#include "hbf/rng.hpp"
#include "hbf/config.hpp"
#include "hbf/codebook.hpp"
#include "hbf/channel.hpp"
#include "hbf/training.hpp"
#include "hbf/beamcore.hpp"
#include "hbf/reference.hpp"
#include "hbf/metrics.hpp"
#include "hbf/harness.hpp"

#endif
