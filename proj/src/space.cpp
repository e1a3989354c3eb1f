#include "ragopt/space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace ragopt {

namespace {

constexpr int kMaxRejectionAttempts = 10000;

double value_as_double(const ParamValue& v) {
    if (std::holds_alternative<double>(v)) return std::get<double>(v);
    if (std::holds_alternative<std::int64_t>(v)) return static_cast<double>(std::get<std::int64_t>(v));
    throw std::invalid_argument("categorical value has no numeric interpretation");
}

}  // namespace

std::size_t ParameterSpec::encoded_width() const {
    if (is_categorical()) return std::get<CategoricalDomain>(domain).labels.size();
    return 1;
}

SearchSpace::SearchSpace(std::vector<ParameterSpec> parameters, std::vector<Constraint> constraints)
    : parameters_(std::move(parameters)), constraints_(std::move(constraints)) {
    std::unordered_set<std::string> names;
    for (const auto& p : parameters_) {
        if (!names.insert(p.name).second)
            throw std::invalid_argument("duplicate parameter name: " + p.name);
        if (p.is_continuous()) {
            const auto& d = std::get<ContinuousDomain>(p.domain);
            if (!(d.lower < d.upper))
                throw std::invalid_argument("continuous parameter " + p.name + ": lower must be < upper");
        } else if (p.is_integer_choice()) {
            const auto& d = std::get<IntegerChoiceDomain>(p.domain);
            if (d.choices.empty())
                throw std::invalid_argument("integer-choice parameter " + p.name + ": empty choice list");
            if (std::adjacent_find(d.choices.begin(), d.choices.end(),
                                   [](auto a, auto b) { return a >= b; }) != d.choices.end())
                throw std::invalid_argument("integer-choice parameter " + p.name +
                                            ": choices must be strictly increasing");
        } else {
            const auto& d = std::get<CategoricalDomain>(p.domain);
            if (d.labels.empty())
                throw std::invalid_argument("categorical parameter " + p.name + ": empty label list");
            std::unordered_set<std::string> uniq(d.labels.begin(), d.labels.end());
            if (uniq.size() != d.labels.size())
                throw std::invalid_argument("categorical parameter " + p.name + ": duplicate labels");
        }
        encoded_dim_ += p.encoded_width();
    }
    for (const auto& c : constraints_) {
        const auto& l = parameters_[index_of(c.left)];
        const auto& r = parameters_[index_of(c.right)];
        const bool both_int = l.is_integer_choice() && r.is_integer_choice();
        const bool both_cont = l.is_continuous() && r.is_continuous();
        if (!both_int && !both_cont)
            throw std::invalid_argument("constraint " + c.left + " < " + c.right +
                                        ": sides must both be integer-choice or both continuous");
    }
}

std::size_t SearchSpace::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < parameters_.size(); ++i)
        if (parameters_[i].name == name) return i;
    throw std::invalid_argument("unknown parameter: " + name);
}

std::vector<Violation> SearchSpace::validate(const Configuration& config) const {
    if (config.values.size() != parameters_.size()) {
        std::ostringstream os;
        os << "configuration has " << config.values.size() << " values, space declares "
           << parameters_.size() << " parameters";
        throw ArityMismatch(os.str());
    }
    std::vector<Violation> violations;
    for (std::size_t i = 0; i < parameters_.size(); ++i) {
        const auto& p = parameters_[i];
        const auto& v = config.values[i];
        if (p.is_continuous()) {
            const auto& d = std::get<ContinuousDomain>(p.domain);
            if (!std::holds_alternative<double>(v)) {
                violations.push_back({p.name, "expected a real value"});
                continue;
            }
            const double x = std::get<double>(v);
            if (!std::isfinite(x) || x < d.lower || x > d.upper) {
                std::ostringstream os;
                os << "value " << x << " outside [" << d.lower << ", " << d.upper << "]";
                violations.push_back({p.name, os.str()});
            }
        } else if (p.is_integer_choice()) {
            const auto& d = std::get<IntegerChoiceDomain>(p.domain);
            if (!std::holds_alternative<std::int64_t>(v)) {
                violations.push_back({p.name, "expected an integer value"});
                continue;
            }
            const auto x = std::get<std::int64_t>(v);
            if (!std::binary_search(d.choices.begin(), d.choices.end(), x)) {
                std::ostringstream os;
                os << "value " << x << " not in the choice set";
                violations.push_back({p.name, os.str()});
            }
        } else {
            const auto& d = std::get<CategoricalDomain>(p.domain);
            if (!std::holds_alternative<std::string>(v)) {
                violations.push_back({p.name, "expected a label"});
                continue;
            }
            const auto& x = std::get<std::string>(v);
            if (std::find(d.labels.begin(), d.labels.end(), x) == d.labels.end())
                violations.push_back({p.name, "label '" + x + "' not in the label set"});
        }
    }
    if (!violations.empty()) return violations;  // domain errors make constraint values meaningless
    for (const auto& c : constraints_) {
        const double l = value_as_double(config.values[index_of(c.left)]);
        const double r = value_as_double(config.values[index_of(c.right)]);
        if (!(l < r)) {
            std::ostringstream os;
            os << c.left << " (" << l << ") must be < " << c.right << " (" << r << ")";
            violations.push_back({c.left + " < " + c.right, os.str()});
        }
    }
    return violations;
}

std::vector<double> SearchSpace::encode(const Configuration& config) const {
    if (const auto v = validate(config); !v.empty())
        throw std::invalid_argument("cannot encode an invalid configuration (" + v.front().subject +
                                    ": " + v.front().message + ")");
    std::vector<double> out;
    out.reserve(encoded_dim_);
    for (std::size_t i = 0; i < parameters_.size(); ++i) {
        const auto& p = parameters_[i];
        const auto& v = config.values[i];
        if (p.is_continuous()) {
            const auto& d = std::get<ContinuousDomain>(p.domain);
            out.push_back((std::get<double>(v) - d.lower) / (d.upper - d.lower));
        } else if (p.is_integer_choice()) {
            const auto& d = std::get<IntegerChoiceDomain>(p.domain);
            const auto it = std::lower_bound(d.choices.begin(), d.choices.end(), std::get<std::int64_t>(v));
            const auto rank = static_cast<std::size_t>(it - d.choices.begin());
            out.push_back(d.choices.size() == 1
                              ? 0.0
                              : static_cast<double>(rank) / static_cast<double>(d.choices.size() - 1));
        } else {
            const auto& d = std::get<CategoricalDomain>(p.domain);
            const auto& label = std::get<std::string>(v);
            for (const auto& l : d.labels) out.push_back(l == label ? 1.0 : 0.0);
        }
    }
    return out;
}

Configuration SearchSpace::decode(std::span<const double> point) const {
    if (point.size() != encoded_dim_) {
        std::ostringstream os;
        os << "point has dimension " << point.size() << ", encoded space has " << encoded_dim_;
        throw std::invalid_argument(os.str());
    }
    Configuration config;
    config.values.reserve(parameters_.size());
    std::size_t offset = 0;
    for (const auto& p : parameters_) {
        if (p.is_continuous()) {
            const auto& d = std::get<ContinuousDomain>(p.domain);
            const double t = std::clamp(point[offset], 0.0, 1.0);
            config.values.emplace_back(d.lower + t * (d.upper - d.lower));
            offset += 1;
        } else if (p.is_integer_choice()) {
            const auto& d = std::get<IntegerChoiceDomain>(p.domain);
            const double t = std::clamp(point[offset], 0.0, 1.0);
            std::size_t best = 0;
            double best_dist = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < d.choices.size(); ++r) {
                const double anchor =
                    d.choices.size() == 1 ? 0.0
                                          : static_cast<double>(r) / static_cast<double>(d.choices.size() - 1);
                const double dist = std::abs(t - anchor);
                if (dist < best_dist) {
                    best_dist = dist;
                    best = r;
                }
            }
            config.values.emplace_back(d.choices[best]);
            offset += 1;
        } else {
            const auto& d = std::get<CategoricalDomain>(p.domain);
            std::size_t best = 0;
            for (std::size_t j = 1; j < d.labels.size(); ++j)
                if (point[offset + j] > point[offset + best]) best = j;
            config.values.emplace_back(d.labels[best]);
            offset += d.labels.size();
        }
    }

    // Constraint repair: lower the left side to the largest admissible value.
    for (const auto& c : constraints_) {
        const std::size_t li = index_of(c.left);
        const std::size_t ri = index_of(c.right);
        const double r = value_as_double(config.values[ri]);
        if (value_as_double(config.values[li]) < r) continue;
        const auto& lp = parameters_[li];
        if (lp.is_integer_choice()) {
            const auto& d = std::get<IntegerChoiceDomain>(lp.domain);
            const auto it = std::lower_bound(d.choices.begin(), d.choices.end(),
                                             static_cast<std::int64_t>(std::ceil(r)));
            if (it == d.choices.begin())
                throw UnsatisfiableSpace("constraint " + c.left + " < " + c.right +
                                         " admits no value for " + c.left);
            config.values[li] = *(it - 1);
        } else {
            const auto& d = std::get<ContinuousDomain>(lp.domain);
            const double repaired = r - 1e-9 * (d.upper - d.lower);
            if (repaired < d.lower)
                throw UnsatisfiableSpace("constraint " + c.left + " < " + c.right +
                                         " admits no value for " + c.left);
            config.values[li] = std::min(value_as_double(config.values[li]), repaired);
        }
    }

    if (const auto v = validate(config); !v.empty())
        throw UnsatisfiableSpace("constraint repair failed: " + v.front().subject + ": " +
                                 v.front().message);
    return config;
}

Configuration SearchSpace::sample_uniform(Rng& rng) const {
    for (int attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
        Configuration config;
        config.values.reserve(parameters_.size());
        for (const auto& p : parameters_) {
            if (p.is_continuous()) {
                const auto& d = std::get<ContinuousDomain>(p.domain);
                std::uniform_real_distribution<double> u(d.lower, d.upper);
                config.values.emplace_back(u(rng));
            } else if (p.is_integer_choice()) {
                const auto& d = std::get<IntegerChoiceDomain>(p.domain);
                std::uniform_int_distribution<std::size_t> u(0, d.choices.size() - 1);
                config.values.emplace_back(d.choices[u(rng)]);
            } else {
                const auto& d = std::get<CategoricalDomain>(p.domain);
                std::uniform_int_distribution<std::size_t> u(0, d.labels.size() - 1);
                config.values.emplace_back(d.labels[u(rng)]);
            }
        }
        if (validate(config).empty()) return config;
    }
    throw UnsatisfiableSpace("rejection sampling exhausted: constraints appear unsatisfiable");
}

SearchSpace parse_space_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    std::vector<ParameterSpec> params;
    for (const auto& pj : j.at("parameters")) {
        ParameterSpec p;
        p.name = pj.at("name").get<std::string>();
        const auto type = pj.at("type").get<std::string>();
        if (type == "continuous") {
            p.domain = ContinuousDomain{pj.at("lower").get<double>(), pj.at("upper").get<double>()};
        } else if (type == "integer_choice") {
            p.domain = IntegerChoiceDomain{pj.at("choices").get<std::vector<std::int64_t>>()};
        } else if (type == "categorical") {
            p.domain = CategoricalDomain{pj.at("labels").get<std::vector<std::string>>()};
        } else {
            throw std::invalid_argument("parameter " + p.name + ": unknown type '" + type + "'");
        }
        params.push_back(std::move(p));
    }
    std::vector<Constraint> constraints;
    if (j.contains("constraints")) {
        for (const auto& cj : j.at("constraints")) {
            const auto type = cj.at("type").get<std::string>();
            if (type != "less_than")
                throw std::invalid_argument("unknown constraint type '" + type + "'");
            constraints.push_back({cj.at("left").get<std::string>(), cj.at("right").get<std::string>()});
        }
    }
    return SearchSpace(std::move(params), std::move(constraints));
}

SearchSpace load_space(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open space file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_space_json(ss.str());
}

std::string to_string(const ParamValue& value) {
    if (std::holds_alternative<double>(value)) {
        std::ostringstream os;
        os.precision(17);
        os << std::get<double>(value);
        return os.str();
    }
    if (std::holds_alternative<std::int64_t>(value)) return std::to_string(std::get<std::int64_t>(value));
    return std::get<std::string>(value);
}

}  // namespace ragopt
