#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ragopt/rng.hpp"

namespace ragopt {

struct ContinuousDomain {
    double lower = 0.0;
    double upper = 1.0;
};

struct IntegerChoiceDomain {
    std::vector<std::int64_t> choices;  // non-empty, strictly increasing
};

struct CategoricalDomain {
    std::vector<std::string> labels;  // non-empty, unique
};

struct ParameterSpec {
    std::string name;
    std::variant<ContinuousDomain, IntegerChoiceDomain, CategoricalDomain> domain;

    bool is_continuous() const { return std::holds_alternative<ContinuousDomain>(domain); }
    bool is_integer_choice() const { return std::holds_alternative<IntegerChoiceDomain>(domain); }
    bool is_categorical() const { return std::holds_alternative<CategoricalDomain>(domain); }

    // Number of unit-cube coordinates the parameter occupies (one-hot block
    // for categoricals, one coordinate otherwise).
    std::size_t encoded_width() const;
};

using ParamValue = std::variant<double, std::int64_t, std::string>;

// strict-less-than(left, right); both sides integer-choice or both continuous.
struct Constraint {
    std::string left;
    std::string right;
};

struct Configuration {
    std::vector<ParamValue> values;  // one per parameter, in space order
    bool operator==(const Configuration&) const = default;
};

struct Violation {
    std::string subject;  // offending parameter or constraint
    std::string message;
};

class ArityMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnsatisfiableSpace : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SearchSpace {
public:
    SearchSpace(std::vector<ParameterSpec> parameters, std::vector<Constraint> constraints);

    const std::vector<ParameterSpec>& parameters() const { return parameters_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }

    std::size_t index_of(const std::string& name) const;  // throws on unknown name
    std::size_t encoded_dimension() const { return encoded_dim_; }

    // Empty list means the configuration is valid. Throws ArityMismatch when
    // the value count does not match the parameter count (a usage error, not
    // a domain violation).
    std::vector<Violation> validate(const Configuration& config) const;

    // Maps a valid configuration into [0,1]^d: continuous min-max scaled,
    // integer choices by rank index, categoricals one-hot expanded.
    std::vector<double> encode(const Configuration& config) const;

    // Inverse of encode up to snapping: nearest rank for integer choices,
    // argmax per one-hot block (ties to the lowest label index), constraint
    // repair by lowering the left side to the largest admissible value.
    Configuration decode(std::span<const double> point) const;

    // Each domain value equally likely per parameter; rejection-resamples
    // until the constraints hold. Throws UnsatisfiableSpace after a bounded
    // number of rejections.
    Configuration sample_uniform(Rng& rng) const;

private:
    std::vector<ParameterSpec> parameters_;
    std::vector<Constraint> constraints_;
    std::size_t encoded_dim_ = 0;
};

// Space-definition file: JSON with a "parameters" list (name/type/domain)
// and an optional "constraints" list. configs/space_appendix_b.json ships
// the default seven-parameter RAG space.
SearchSpace parse_space_json(const std::string& text);
SearchSpace load_space(const std::string& path);

std::string to_string(const ParamValue& value);

}  // namespace ragopt
