/*
 * Copyright 2026 The sparse-abft Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace sabft {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input (matrix files, pattern strings, fault specs).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Operand dimensions that do not fit the operation or the array.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A checksum digit that cannot be carried by the input datapath.
class RepresentabilityError : public Error {
 public:
  using Error::Error;
};

/// Operation issued in a simulator phase that does not allow it.
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace sabft
