// Copyright 2026 The critnet Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace critnet {

// Base class of every error raised by the library. The category lets a
// front end map failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  enum class Category { Usage, Numeric };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(Category::Usage, what) {}
};

// An integrand produced NaN or infinity at a quadrature abscissa.
class NonFiniteIntegrand : public Error {
 public:
  NonFiniteIntegrand(double abscissa, const std::string& what)
      : Error(Category::Numeric, what), abscissa_(abscissa) {}

  double abscissa() const noexcept { return abscissa_; }

 private:
  double abscissa_;
};

// A requested feature is outside the supported envelope.
class Unsupported : public Error {
 public:
  explicit Unsupported(const std::string& what) : Error(Category::Usage, what) {}
};

class UnknownActivation : public Error {
 public:
  explicit UnknownActivation(const std::string& name)
      : Error(Category::Usage, "unknown activation '" + name + "'"), name_(name) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class ArityError : public Error {
 public:
  explicit ArityError(const std::string& what) : Error(Category::Usage, what) {}
};

// A state violates a structural invariant (for example q > lambda).
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& what) : Error(Category::Numeric, what) {}
};

// A variance that must be positive is zero.
class DegenerateVariance : public Error {
 public:
  explicit DegenerateVariance(const std::string& what) : Error(Category::Numeric, what) {}
};

}  // namespace critnet
