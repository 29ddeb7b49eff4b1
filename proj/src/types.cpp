#include "dashtrack/types.hpp"

namespace dashtrack {

std::string to_string(Source s) {
  switch (s) {
    case Source::Ann: return "ann";
    case Source::Snn: return "snn";
    case Source::Fused: return "fused";
    case Source::Gt: return "gt";
  }
  throw DataError("unknown source enum value");
}

Source source_from_string(const std::string& s) {
  if (s == "ann") return Source::Ann;
  if (s == "snn") return Source::Snn;
  if (s == "fused") return Source::Fused;
  if (s == "gt") return Source::Gt;
  throw DataError("unknown source '" + s + "'");
}

}  // namespace dashtrack
