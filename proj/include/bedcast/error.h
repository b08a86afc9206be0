/*
* Copyright (C) 2026 bedcast contributors
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
#ifndef BEDCAST_ERROR_H
#define BEDCAST_ERROR_H

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bedcast
{

enum class ErrorCode
{
    InvalidArgument,
    // ingest
    MissingColumn,
    BadDate,
    BadNumber,
    NegativeLos,
    EmptyWindow,
    AllGaps,
    // decomposition
    WindowTooLarge,
    SeriesTooShort,
    // LOS fitting
    EmptySample,
    TooFewSamples,
    NonConvergence,
    DomainError,
    // occupancy / planning
    CoverageError,
    OutOfRange,
    EmptySeries,
    SearchExhausted,
    EmptyInput,
    // scenario / projection
    FamilyMismatch,
    MissingBirths,
    MissingHistory,
    ZeroYearTotal,
    EmptyRuns,
    // simulation / diagnostics
    TooFewReplications,
    ZeroMean,
    TooFewBins,
    // configuration / io
    SchemaError,
    IoError,
};

std::string_view to_string(ErrorCode code);

/**
 * Error raised by every bedcast operation.
 * Carries a machine-readable code and, for row-oriented input errors, the 1-based data row.
 */
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> row = std::nullopt);

    ErrorCode code() const
    {
        return m_code;
    }

    std::optional<std::size_t> row() const
    {
        return m_row;
    }

private:
    ErrorCode m_code;
    std::optional<std::size_t> m_row;
};

} // namespace bedcast

#endif // BEDCAST_ERROR_H
