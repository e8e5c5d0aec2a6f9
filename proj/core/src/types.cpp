#include "dasml/types.hpp"

namespace dasml {

const char* to_string(SourceKind k) {
  switch (k) {
    case SourceKind::None:
      return "None";
    case SourceKind::Excavator:
      return "Excavator";
    case SourceKind::Highway:
      return "Highway";
    case SourceKind::Walking:
      return "Walking";
  }
  return "None";
}

SourceKind source_kind_from_string(const std::string& s) {
  if (s == "None") return SourceKind::None;
  if (s == "Excavator") return SourceKind::Excavator;
  if (s == "Highway") return SourceKind::Highway;
  if (s == "Walking") return SourceKind::Walking;
  throw DataError("unknown source kind: " + s);
}

}  // namespace dasml
