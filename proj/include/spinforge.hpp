/* Copyright 2026 The SpinForge Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Umbrella header for the whole library.

#pragma once

#include "spinforge/bounded_bfgs.hpp"
#include "spinforge/error.hpp"
#include "spinforge/geodesic.hpp"
#include "spinforge/grape.hpp"
#include "spinforge/matrix_kernel.hpp"
#include "spinforge/mintime.hpp"
#include "spinforge/parallel.hpp"
#include "spinforge/propagation.hpp"
#include "spinforge/pulse_io.hpp"
#include "spinforge/qpt.hpp"
#include "spinforge/spin_model.hpp"
#include "spinforge/version.hpp"
