#pragma once

#include <stdexcept>
#include <string>

#include "logopt/model.hpp"

namespace logopt {

/// Malformed model file; the message carries line/column diagnostics.
class ModelParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse a model from its JSON text. Schema (all numbers accept integers):
///
///   {
///     "dim": 1,
///     "horizon": 1.0,
///     "b": [0.08],                       // constant characteristics ...
///     "c": [[0.04]],
///     "atoms": [{"x": [-0.5], "w": 1.0}],
///     "segments": [                      // ... or piecewise-constant ones
///       {"t": 0.0, "b": [...], "c": [...], "atoms": [...]},
///       {"t": 0.5, ...}
///     ]
///   }
///
/// Exactly one of (b, c, atoms) or segments must be present; "atoms" may be
/// omitted for a purely diffusive model, "c" for a pure-jump one.
MarketModel parse_model(const std::string& text, const std::string& origin = "<string>");

/// Load and parse a model file. Throws ModelParseError with the file name and
/// position on malformed input.
MarketModel load_model(const std::string& path);

/// Serialize a model back to its JSON text (round-trips through parse_model).
std::string model_to_json(const MarketModel& m);

}  // namespace logopt
