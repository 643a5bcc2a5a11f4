// Copyright 2026 The kmpc Authors
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

#include <cstddef>
#include <functional>

namespace kmpc {

/// Worker count: KMPC_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs fn(index, worker) for index in [0, n) on up to `workers` threads.
/// Results must be written by index so the outcome is schedule-independent.
/// If any call throws, the exception of the lowest failing index is rethrown
/// after all workers stop.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t index, std::size_t worker)>& fn);

}  // namespace kmpc
