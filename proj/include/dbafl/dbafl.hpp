/*
 * Copyright 2026 The DBAFL Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "dbafl/aggregation.hpp"
#include "dbafl/chain.hpp"
#include "dbafl/config.hpp"
#include "dbafl/errors.hpp"
#include "dbafl/io.hpp"
#include "dbafl/model.hpp"
#include "dbafl/netsim.hpp"
#include "dbafl/orchestrator.hpp"
#include "dbafl/random.hpp"
#include "dbafl/scenario.hpp"
