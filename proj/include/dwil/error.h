// Copyright 2026 The dwil Authors
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

#ifndef DWIL_ERROR_H_
#define DWIL_ERROR_H_

#include <stdexcept>
#include <string>

namespace dwil {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidTrajectoryError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidStateError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(int epoch, const std::string& what)
      : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

class ReplayFailedError : public Error {
 public:
  ReplayFailedError(int step, const std::string& what)
      : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

class CalibrationError : public Error {
 public:
  CalibrationError(double d_min, double d_max, const std::string& what)
      : Error(what), d_min_(d_min), d_max_(d_max) {}
  double d_min() const { return d_min_; }
  double d_max() const { return d_max_; }

 private:
  double d_min_;
  double d_max_;
};

// No transition carries positive weight.
class EmptySupportError : public Error {
 public:
  using Error::Error;
};

// Wraps a failure with the pipeline stage that produced it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace dwil

#endif  // DWIL_ERROR_H_
