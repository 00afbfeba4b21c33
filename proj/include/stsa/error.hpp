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

#include <stdexcept>
#include <string>

namespace stsa {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or extent mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value (window size, embedding width, schedule, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Query outside of a grid or tensor.
class BoundsError : public Error {
 public:
  using Error::Error;
};

// Non-finite value where finiteness is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed file or document.
class ParseError : public Error {
 public:
  using Error::Error;
};

class UnsupportedVersionError : public ParseError {
 public:
  using ParseError::ParseError;
};

// A flow between two frames could not be produced from the flow set.
class FlowChainError : public Error {
 public:
  using Error::Error;
};

// Blocks or alignment maps do not belong to the layout they are applied to.
class MapMismatchError : public Error {
 public:
  using Error::Error;
};

// Operation refuses the requested scalar precision.
class PrecisionError : public Error {
 public:
  using Error::Error;
};

// Dense attention refused above its token cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace stsa
