#pragma once

#include <stdexcept>
#include <string>

namespace mixqa {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// audio_io
class UnsupportedFormat : public Error { using Error::Error; };
class CorruptFile : public Error { using Error::Error; };
class NotStereo : public Error { using Error::Error; };

// dsp
class UnsupportedRate : public Error { using Error::Error; };
class BadFrameLength : public Error { using Error::Error; };

// analysis
class TooShort : public Error { using Error::Error; };
class SilentInput : public Error { using Error::Error; };

// report
class EmptyCorpus : public Error { using Error::Error; };

// stats
class MissingColumn : public Error { using Error::Error; };
class EmptyFile : public Error { using Error::Error; };
class UnknownField : public Error { using Error::Error; };
class DegenerateTable : public Error { using Error::Error; };
class EmptySeries : public Error { using Error::Error; };

// configuration files
class ConfigError : public Error { using Error::Error; };

} // namespace mixqa
