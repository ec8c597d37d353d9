#pragma once

#include <stdexcept>
#include <string>

namespace orgsim {

/// Lookup of a concept that is not part of the tree.
struct InvalidConceptError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// History timestamp going backwards.
struct InvalidTimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Protocol operation invoked outside its phase precondition.
struct ProtocolOrderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Metric queried for a subject with no recorded events.
struct NoDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Configuration or input-file validation failure; the message names the offending field.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem failure; the message names the path.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace orgsim
