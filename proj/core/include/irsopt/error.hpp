// SPDX-License-Identifier: Apache-2.0
//
// irsopt: joint uplink power control, multi-user detection and IRS passive
// beamforming for delay-constrained mmWave systems
// Copyright (C) 2026 The irsopt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef IRSOPT_ERROR_HPP
#define IRSOPT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace irsopt {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Inconsistent or zero dimensions.
class DimensionError : public Error
{
public:
    using Error::Error;
};

// Argument outside the mathematical domain (non-positive distance, bandwidth, ...).
class DomainError : public Error
{
public:
    using Error::Error;
};

// Spectral radius of the interference matrix is not below one.
class InfeasibleError : public Error
{
public:
    using Error::Error;
};

// Zero denominator: vanishing desired-signal projection, zero detector, retraction at the origin.
class SingularError : public Error
{
public:
    using Error::Error;
};

// Invalid experiment specification.
class SpecError : public Error
{
public:
    using Error::Error;
};

class IoError : public Error
{
public:
    using Error::Error;
};

} // namespace irsopt

#endif
