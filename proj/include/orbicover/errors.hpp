// Exception taxonomy for the orbicover library. Every structured failure of
// a library operation is one of these types; the CLI maps them to exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace orbicover {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define ORBICOVER_ERROR(Name)                                  \
    struct Name : error {                                      \
        explicit Name(const std::string& msg = #Name)          \
            : error(msg) {}                                    \
    }

// numfield
ORBICOVER_ERROR(NotMonic);
ORBICOVER_ERROR(ReduciblePolynomial);
ORBICOVER_ERROR(DyadicPrime);
ORBICOVER_ERROR(BadPrime);
ORBICOVER_ERROR(DenominatorNotCoprime);
ORBICOVER_ERROR(NoSplitPrimeInBound);
ORBICOVER_ERROR(FieldIsRationals);

// finfield
ORBICOVER_ERROR(DivisionByZero);
ORBICOVER_ERROR(ZeroInput);
ORBICOVER_ERROR(FactorBudgetExceeded);

// quadform
ORBICOVER_ERROR(ZeroEntryAtPlace);
ORBICOVER_ERROR(NotTotallyReal);
ORBICOVER_ERROR(WrongSignatureProfile);
ORBICOVER_ERROR(BadReduction);

// orders
ORBICOVER_ERROR(MissingSquareClass);
ORBICOVER_ERROR(DimensionTooSmall);
ORBICOVER_ERROR(EvenDimension);
ORBICOVER_ERROR(EllEqualsP);
ORBICOVER_ERROR(ZsigmondyFailure);
ORBICOVER_ERROR(NoOddPrimeDivisor);

// matgroup
ORBICOVER_ERROR(DimMismatch);
ORBICOVER_ERROR(IsotropicVector);
ORBICOVER_ERROR(TooLarge);
ORBICOVER_ERROR(NotSquareDisc);
ORBICOVER_ERROR(NoIsotropicVector);
ORBICOVER_ERROR(SearchBudgetExceeded);

// certify
ORBICOVER_ERROR(NoCommonEll);
ORBICOVER_ERROR(InsufficientPrimes);
ORBICOVER_ERROR(MalformedCertificate);

#undef ORBICOVER_ERROR

}  // namespace orbicover
