/*
 * Copyright 2026 The dynbucket Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DYNBUCKET_ERROR_HPP
#define DYNBUCKET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dynbucket {

// Error categories. The numeric values are shared with the C API status codes.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kParse = 2,
  kValidation = 3,
  kIo = 4,
  kEstimation = 5,
  kCalibration = 6,
  kSimulation = 7,
  kInternal = 99,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::kInvalidArgument, what) {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorCode::kValidation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

class EstimationError : public Error {
 public:
  explicit EstimationError(const std::string& what)
      : Error(ErrorCode::kEstimation, what) {}
};

class CalibrationError : public Error {
 public:
  CalibrationError(std::size_t bucket, const std::string& what)
      : Error(ErrorCode::kCalibration, what), bucket_(bucket) {}

  std::size_t bucket() const noexcept { return bucket_; }

 private:
  std::size_t bucket_;
};

class SimulationError : public Error {
 public:
  explicit SimulationError(const std::string& what)
      : Error(ErrorCode::kSimulation, what) {}
};

}  // namespace dynbucket

#endif  // DYNBUCKET_ERROR_HPP
