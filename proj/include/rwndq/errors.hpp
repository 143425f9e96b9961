#pragma once

#include <stdexcept>
#include <string>

namespace rwndq {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScaleOutOfRange : Error {
    using Error::Error;
};

struct InvalidParams : Error {
    using Error::Error;
};

struct InvalidConfig : Error {
    using Error::Error;
};

struct InvalidTopology : Error {
    using Error::Error;
};

struct ScenarioInvalid : Error {
    using Error::Error;
};

struct EmptyInput : Error {
    using Error::Error;
};

// Scenario-file syntax error, carries the 1-based line number.
struct ParseError : Error {
    ParseError(int line_no, const std::string& what)
        : Error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
    int line;
};

// Semantic error in an otherwise well-formed scenario, names the field.
struct ValidationError : Error {
    ValidationError(const std::string& field_name, const std::string& what)
        : Error(field_name + ": " + what), field(field_name) {}
    std::string field;
};

}  // namespace rwndq
