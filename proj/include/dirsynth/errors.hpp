/*
 * dirsynth : registration-based multi-contrast MR image synthesis
 *
 * Copyright 2026 the dirsynth authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DIRSYNTH_ERRORS_HPP
#define DIRSYNTH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dirsynth {

// std::invalid_argument is used directly for argument/geometry validation.

// Inputs that make a quantity mathematically undefined (constant image for
// correlation, zero intensity range for SSIM, ...).
class DegenerateInputError : public std::runtime_error {
  public:
    explicit DegenerateInputError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values encountered during optimization; carries the iteration.
class NumericalError : public std::runtime_error {
  public:
    NumericalError(const std::string& what, long iteration)
        : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration) {}
    long iteration() const { return iteration_; }

  private:
    long iteration_;
};

// Root-finding failed to locate a consistent parameter set.
class FitError : public std::runtime_error {
  public:
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

// File-format problems, in increasing specificity.
class FormatError : public std::runtime_error {
  public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

class UnsupportedFormatError : public FormatError {
  public:
    explicit UnsupportedFormatError(const std::string& what) : FormatError(what) {}
};

class CorruptFileError : public FormatError {
  public:
    explicit CorruptFileError(const std::string& what) : FormatError(what) {}
};

// Phantom construction could not place the requested structures.
class GenerationError : public std::runtime_error {
  public:
    explicit GenerationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dirsynth

#endif
