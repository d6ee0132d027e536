// Copyright 2026 The backflow-lab Authors
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

// backflow.hpp: umbrella header.

#pragma once

#include "backflow/core_types.hpp"
#include "backflow/special_functions.hpp"
#include "backflow/propagation.hpp"
#include "backflow/generator_analysis.hpp"
#include "backflow/information.hpp"
#include "backflow/netfd.hpp"
#include "backflow/models.hpp"
#include "backflow/regime.hpp"
#include "backflow/phase_diagram.hpp"
