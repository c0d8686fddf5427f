/*
 * Copyright 2026 The imtsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "imtsim/common.hpp"
#include "imtsim/config.hpp"
#include "imtsim/costmodel.hpp"
#include "imtsim/dataflow.hpp"
#include "imtsim/funcsim.hpp"
#include "imtsim/hardware.hpp"
#include "imtsim/hwmap.hpp"
#include "imtsim/oracle.hpp"
#include "imtsim/scheduler.hpp"
#include "imtsim/serialize.hpp"
#include "imtsim/simkernel.hpp"
#include "imtsim/tiling.hpp"
#include "imtsim/workload.hpp"
