/*
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

#pragma once

#include <stdexcept>
#include <string>

namespace vizrec {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CsvError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class UnknownFeature : public Error {
 public:
  explicit UnknownFeature(const std::string& name)
      : Error("unknown feature '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

// Raised when a predicate selects no rows; such visualizations are
// excluded from the hypothesis space (Tarone).
class EmptySupport : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class Unsatisfiable : public Error {
 public:
  using Error::Error;
};

// A request that would widen a pre-registered query class.
class OutsideQueryClass : public Error {
 public:
  using Error::Error;
};

}  // namespace vizrec
