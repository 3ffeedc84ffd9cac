// SPDX-License-Identifier: Apache-2.0
//
// apopt - access point placement optimization for tunnel radio coverage
// Copyright (C) 2026 The apopt authors
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

#pragma once

#include "agents.hpp"
#include "cgan.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "cost.hpp"
#include "env.hpp"
#include "errors.hpp"
#include "hj.hpp"
#include "io.hpp"
#include "nn.hpp"
#include "stats.hpp"
#include <apopt/commands.hpp>
