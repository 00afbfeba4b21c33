// Copyright 2026 The STSA Authors.
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

#pragma once

#include <functional>

#include "stsa/flow.hpp"
#include "stsa/tensor.hpp"

namespace stsa {

// Selects the (frame, cell) pairs a metric averages over; empty = all.
using CellMask = std::function<bool(std::size_t frame, std::size_t cell)>;

// Mean over k = 0..F-2 and selected cells c of
//   || x[k+1, nearest_cell(c + F^{k->k+1}(c))] - x[k, c] ||^2.
// Returns 0 when nothing is selected.
template <typename T>
double along_flow_variation(const LatentVideo<T>& x, const FlowSet& flows,
                            const CellMask& mask = {});

// The same measure with zero flow: per-pixel change between neighbouring frames.
template <typename T>
double naive_temporal_variation(const LatentVideo<T>& x, const CellMask& mask = {});

}  // namespace stsa
