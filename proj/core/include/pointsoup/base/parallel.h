// Copyright 2026 The Pointsoup Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POINTSOUP_BASE_PARALLEL_H_
#define POINTSOUP_BASE_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace pointsoup {

// Worker count from POINTSOUP_THREADS (0 or unset = hardware concurrency).
int WorkerCount();

// Runs fn(begin, end) over contiguous chunks of [0, n). Each index is visited
// exactly once; callers write results into disjoint slots so the outcome does
// not depend on the number of workers.
void ParallelFor(size_t n, size_t grain,
                 const std::function<void(size_t, size_t)>& fn);

}  // namespace pointsoup

#endif  // POINTSOUP_BASE_PARALLEL_H_
