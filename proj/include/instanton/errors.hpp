#pragma once

#include <stdexcept>
#include <string>

namespace instanton {

// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error { public: using Error::Error; };
class DecodeError : public Error { public: using Error::Error; };
class StaleEphemerisError : public Error { public: using Error::Error; };
class SnapshotUnavailableError : public Error { public: using Error::Error; };
class SnapshotFormatError : public Error { public: using Error::Error; };
class StaleSnapshotError : public Error { public: using Error::Error; };
class ClockWentBackwardsError : public Error { public: using Error::Error; };
class CausalityError : public Error { public: using Error::Error; };
class InsufficientSatellitesError : public Error { public: using Error::Error; };
class GeometryError : public Error { public: using Error::Error; };
class ProtocolError : public Error { public: using Error::Error; };
class ScenarioError : public Error { public: using Error::Error; };

// I/O failures always carry the offending path in what().
class IoError : public Error {
public:
    IoError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace instanton
