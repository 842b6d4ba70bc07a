/*
 * Copyright 2026 The sparse-abft Authors
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

#include "sabft/checker.hpp"
#include "sabft/config.hpp"
#include "sabft/error.hpp"
#include "sabft/fault.hpp"
#include "sabft/fixed_width.hpp"
#include "sabft/matrix_io.hpp"
#include "sabft/oracle.hpp"
#include "sabft/registers.hpp"
#include "sabft/report.hpp"
#include "sabft/sparsity.hpp"
#include "sabft/systolic.hpp"
#include "sabft/tiling.hpp"
