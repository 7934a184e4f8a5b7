// Copyright 2026 The apsel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Everything in one include.

#pragma once

#include "apsel/csv.hpp"
#include "apsel/dataset.hpp"
#include "apsel/error.hpp"
#include "apsel/json_io.hpp"
#include "apsel/locate.hpp"
#include "apsel/matrix.hpp"
#include "apsel/parallel.hpp"
#include "apsel/pipeline.hpp"
#include "apsel/qubo.hpp"
#include "apsel/rng.hpp"
#include "apsel/search.hpp"
#include "apsel/selection.hpp"
#include "apsel/solver.hpp"
#include "apsel/stats.hpp"
#include "apsel/synthetic.hpp"
