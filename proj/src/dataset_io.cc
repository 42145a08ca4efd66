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

#include "semidp/dataset_io.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "semidp/noise.h"

namespace semidp {

using nlohmann::json;

Dataset ReadDatasetJsonl(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("dataset: missing header line");
  }
  const json header = json::parse(line);
  if (!header.contains("n") || !header.contains("k")) {
    throw std::runtime_error("dataset: header must carry n and k");
  }
  const auto n = header.at("n").get<std::int64_t>();
  const int k = header.at("k").get<int>();
  if (n < 1 || k < 2) {
    throw std::runtime_error("dataset: invalid header (n >= 1, k >= 2)");
  }

  std::vector<Example> examples;
  examples.reserve(static_cast<std::size_t>(n));
  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json record = json::parse(line);
    Example x;
    x.public_payload = record.at("pub").get<std::vector<double>>();
    x.private_value = record.at("priv").get<int>();
    if (x.private_value < 0 || x.private_value >= k) {
      throw std::runtime_error("dataset line " + std::to_string(line_no) +
                               ": priv outside [0, k)");
    }
    examples.push_back(std::move(x));
  }
  if (static_cast<std::int64_t>(examples.size()) != n) {
    throw std::runtime_error(
        "dataset: header advertises n=" + std::to_string(n) + " but " +
        std::to_string(examples.size()) + " examples follow");
  }
  return Dataset(std::move(examples), k);
}

Dataset LoadDatasetJsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return ReadDatasetJsonl(in);
}

void WriteDatasetJsonl(const Dataset& data, std::ostream& out) {
  json header;
  header["n"] = data.size();
  header["k"] = data.private_domain_size();
  out << header.dump() << "\n";
  for (std::int64_t i = 0; i < data.size(); ++i) {
    const Example& x = data.example(i);
    json record;
    record["pub"] = x.public_payload;
    record["priv"] = x.private_value;
    out << record.dump() << "\n";
  }
}

void SaveDatasetJsonl(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  WriteDatasetJsonl(data, out);
}

Dataset RandomDataset(std::int64_t n, int k, std::uint64_t seed) {
  NoiseSource src(seed, 0xD5);
  std::vector<Example> examples;
  examples.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    Example x;
    x.public_payload = {static_cast<double>(i)};
    x.private_value =
        static_cast<int>(src.NextUint64() % static_cast<std::uint64_t>(k));
    examples.push_back(std::move(x));
  }
  return Dataset(std::move(examples), k);
}

}  // namespace semidp
