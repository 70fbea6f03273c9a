/*
 * Copyright 2026 The mvgp Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MVGP_PARALLEL_HPP_
#define MVGP_PARALLEL_HPP_

#include <functional>

#include "mvgp/numerics.hpp"

namespace mvgp {

/// Worker cap: MVGP_THREADS if set and positive, else the hardware count.
int max_threads();

/// Runs fn(0) ... fn(n - 1) on up to max_threads() threads. Each index is
/// handled exactly once; results must not depend on the schedule. If any
/// call throws, the exception of the lowest failing index is rethrown.
void parallel_for(Index n, const std::function<void(Index)>& fn);

}  // namespace mvgp

#endif  // MVGP_PARALLEL_HPP_
