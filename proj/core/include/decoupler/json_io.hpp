#pragma once

#include "decoupler/model.hpp"
#include "decoupler/polynomial.hpp"
#include "decoupler/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace decoupler {

/// Minimal streaming JSON emitter with deterministic output: keys in
/// insertion order, floating-point values printed with %.17g (17
/// significant digits), two-space indentation. Non-finite doubles are
/// emitted as null.
class JsonWriter {
  public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(const std::string& name);
    JsonWriter& value(double v);
    JsonWriter& value(int v);
    JsonWriter& value(std::int64_t v);
    JsonWriter& value(std::uint64_t v);
    JsonWriter& value(bool v);
    JsonWriter& value(const std::string& v);
    JsonWriter& value(const char* v);
    JsonWriter& null();

    std::string str() const { return out_; }

    static std::string format_double(double v);

  private:
    void before_value();
    void newline_indent();
    void append_escaped(const std::string& v);

    std::string out_;
    std::vector<bool> has_items_;  // per nesting level
    bool pending_key_ = false;
};

/// JSON schema {"m": int, "terms": [{"exp": [ints], "coef": float}]},
/// terms in canonical graded-lex order.
std::string polynomial_to_json(const MultiPolynomial& p);
MultiPolynomial polynomial_from_json(const std::string& text);

/// JSON schema {"m": int, "outputs": [<polynomial>, ...]}.
std::string function_to_json(const VectorPolynomial& f);
VectorPolynomial function_from_json(const std::string& text);

/// JSON schema {"W": [[...]], "V": [[...]], "g": [{"coeffs": [c0, c1, ...]}]}.
std::string model_to_json(const DecoupledModel& m);
DecoupledModel model_from_json(const std::string& text);

/// JSON schema {"dims": [...], "data": [...]} (row-major).
std::string tensor_to_json(const DenseTensor& t);
DenseTensor tensor_from_json(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace decoupler
