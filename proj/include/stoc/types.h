// Copyright 2026 The STOC Authors.
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

#ifndef STOC_TYPES_H_
#define STOC_TYPES_H_

#include <cstdint>
#include <initializer_list>
#include <vector>

#include <Eigen/Core>

namespace stoc {

// Rows are samples, columns are feature dimensions.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Binary labels, 0 = normal, 1 = anomaly.
using Labels = std::vector<int>;
using IndexList = std::vector<Index>;

// Mixes a base seed with a list of tags into an independent 64-bit seed
// (splitmix64 finalizer chained over the tags).
std::uint64_t DeriveSeed(std::uint64_t base,
                         std::initializer_list<std::uint64_t> tags);

// Gathers the listed rows of `m` into a new matrix, preserving order.
Matrix SelectRows(const Matrix& m, const IndexList& rows);

}  // namespace stoc

#endif  // STOC_TYPES_H_
