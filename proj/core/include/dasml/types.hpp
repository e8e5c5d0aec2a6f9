#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dasml {

// Signal source categories a scene can contain.
enum class SourceKind : std::uint8_t { None = 0, Excavator = 1, Highway = 2, Walking = 3 };

const char* to_string(SourceKind k);
SourceKind source_kind_from_string(const std::string& s);

// Binary target used by the classifiers: excavator vs everything else.
enum class EventClass : std::uint8_t { Other = 0, Excavator = 1 };

// Input data violating a format, shape, or value contract.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training or evaluation reached a numerically invalid state
// (divergence, non-convergence, non-finite values).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dasml
