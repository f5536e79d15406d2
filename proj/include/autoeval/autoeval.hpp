// Copyright 2026 The AutoEval Authors.
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

#pragma once

#include "autoeval/baselines.hpp"
#include "autoeval/error.hpp"
#include "autoeval/featureset.hpp"
#include "autoeval/harness.hpp"
#include "autoeval/hungarian.hpp"
#include "autoeval/kmeans.hpp"
#include "autoeval/metaset.hpp"
#include "autoeval/regress.hpp"
#include "autoeval/represent.hpp"
#include "autoeval/sampling.hpp"
