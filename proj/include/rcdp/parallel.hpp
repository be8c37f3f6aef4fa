//
// Copyright 2026 The RCDP Authors
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
//

#ifndef RCDP_PARALLEL_HPP
#define RCDP_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace rcdp {

/// Worker cap for parallel loops.  Defaults to hardware concurrency,
/// overridable via the RCDP_THREADS environment variable or set_max_threads.
std::size_t max_threads();
void set_max_threads(std::size_t n);

/// Runs fn(i) for i in [0, n).  Work is split into contiguous chunks; each
/// index writes only its own output slot, so results do not depend on the
/// number of workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace rcdp

#endif  // RCDP_PARALLEL_HPP
