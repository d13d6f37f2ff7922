// Copyright 2026 The simulmt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Umbrella header.

#pragma once

#include "simulmt/asr_sim.hpp"
#include "simulmt/core.hpp"
#include "simulmt/experiment.hpp"
#include "simulmt/io.hpp"
#include "simulmt/metrics.hpp"
#include "simulmt/policy_labels.hpp"
#include "simulmt/policy_model.hpp"
#include "simulmt/simul_decoder.hpp"
#include "simulmt/toy_mt.hpp"
