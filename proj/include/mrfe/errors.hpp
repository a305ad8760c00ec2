#pragma once

#include <stdexcept>
#include <string>

namespace mrfe {

// Shape disagreement between operands.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Invalid hyperparameter or model configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed user-supplied input (text, corpus, identifiers).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class LabelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class VocabError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class RegistryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Binary file (checkpoint, CEMB) is malformed.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Text file (CSV, key=value) failed to parse; message carries the line.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProviderError : public std::runtime_error {
public:
    ProviderError(std::string provider, const std::string& what)
        : std::runtime_error(provider + ": " + what), provider_(std::move(provider)) {}

    const std::string& provider() const noexcept { return provider_; }

private:
    std::string provider_;
};

} // namespace mrfe
