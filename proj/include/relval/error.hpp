#pragma once

#include <stdexcept>
#include <string>

namespace relval {

// Base class for all errors raised by the library. Subtypes exist so callers
// can react to specific failure modes (skip a cell, abort a run, ...).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define RELVAL_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                    \
    public:                                                        \
        explicit Name(const std::string& msg) : Error(msg) {}      \
    }

// dataset
RELVAL_DEFINE_ERROR(MissingColumnError);
RELVAL_DEFINE_ERROR(BadValueError);
RELVAL_DEFINE_ERROR(SchemaMismatchError);
RELVAL_DEFINE_ERROR(EmptyError);
RELVAL_DEFINE_ERROR(TooFewReleasesError);

// classifiers
RELVAL_DEFINE_ERROR(DegenerateDataError);
RELVAL_DEFINE_ERROR(WidthMismatchError);

// metrics
RELVAL_DEFINE_ERROR(SingleClassError);

// validation
RELVAL_DEFINE_ERROR(TooFewRowsError);
RELVAL_DEFINE_ERROR(ExhaustedRetriesError);
RELVAL_DEFINE_ERROR(AllRunsSkippedError);

// metaval
RELVAL_DEFINE_ERROR(AllExcludedError);
RELVAL_DEFINE_ERROR(SingleClassTestReleaseError);

// stats
RELVAL_DEFINE_ERROR(AllZeroDifferencesError);
RELVAL_DEFINE_ERROR(ZeroVarianceError);
RELVAL_DEFINE_ERROR(TooFewError);
RELVAL_DEFINE_ERROR(DegenerateError);

// harness
RELVAL_DEFINE_ERROR(ConfigError);
RELVAL_DEFINE_ERROR(UnknownFormatError);
RELVAL_DEFINE_ERROR(BudgetExceededError);

#undef RELVAL_DEFINE_ERROR

} // namespace relval
