/*
 * Copyright 2026 The tesim Authors
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

#include "tesim/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace tesim {

int threads_from_env() {
    const char* text = std::getenv(kThreadsEnvVar);
    if (!text) return 1;
    int n = 0;
    const char* end = text + std::strlen(text);
    auto [ptr, ec] = std::from_chars(text, end, n);
    if (ec != std::errc{} || ptr != end || n < 1) return 1;
    return n;
}

}  // namespace tesim
