// Copyright 2026 The qtraj Authors
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


// Umbrella header for the qtraj library.

#pragma once

#include "qtraj/analysis.hpp"
#include "qtraj/classical.hpp"
#include "qtraj/ensemble.hpp"
#include "qtraj/error.hpp"
#include "qtraj/hilbert.hpp"
#include "qtraj/io.hpp"
#include "qtraj/jumps.hpp"
#include "qtraj/lindblad.hpp"
#include "qtraj/model.hpp"
#include "qtraj/qsd.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/trajectory.hpp"
