// Copyright 2026 The Veil Authors
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

#ifndef VEIL_API_OPS_HPP_
#define VEIL_API_OPS_HPP_

#include <string>

namespace veil {

// JSON-in, JSON-out entry points shared by the C API and the tests. Each
// throws veil::Error on failure.

// Body: a simulation config object; optional "include_logs": bool.
std::string simulate_json(const std::string& request);

// {"rates": [..], "requests_per_rate": n, "trace_size": n, "seed": n}
std::string bench_json(const std::string& request);

// {"log_path", "log_format", "mechanism", "k_max", "alpha", "dict_dir",
//  "seed", "online_adversary", "synthetic": {...}}. Without log_path a
// synthetic log is generated from "synthetic".
std::string evaluate_json(const std::string& request);

// {"dict_dir", "log_path", "log_format", "truth_path"}
std::string categorize_json(const std::string& request);

// Synthetic log config in, simple_csv text out.
std::string generate_log_csv(const std::string& request);

// JSON array of normalized terms.
std::string normalize_json(const std::string& text);

}  // namespace veil

#endif  // VEIL_API_OPS_HPP_
