// Copyright 2026 The semidp Authors
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

#ifndef SEMIDP_DATASET_IO_H_
#define SEMIDP_DATASET_IO_H_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "semidp/core.h"

namespace semidp {

// JSON-lines dataset format:
//   {"n": <int>, "k": <int>}          header line
//   {"pub": [<float>, ...], "priv": <int>}   one line per example
// The loader validates priv in [0, k) and the advertised count.
Dataset LoadDatasetJsonl(const std::string& path);
Dataset ReadDatasetJsonl(std::istream& in);

void SaveDatasetJsonl(const Dataset& data, const std::string& path);
void WriteDatasetJsonl(const Dataset& data, std::ostream& out);

// Synthetic dataset for experiments: payload[0] = example index, private
// values uniform from the seeded stream.
Dataset RandomDataset(std::int64_t n, int k, std::uint64_t seed);

}  // namespace semidp

#endif  // SEMIDP_DATASET_IO_H_
