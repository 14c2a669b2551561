#include "decoupler/json_io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace decoupler {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(what + ": invalid JSON: " + e.what());
    }
}

const json& require(const json& j, const std::string& field, const std::string& what) {
    auto it = j.find(field);
    if (it == j.end()) {
        throw std::runtime_error(what + ": missing field '" + field + "'");
    }
    return *it;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) {
        throw std::runtime_error(what + ": expected a non-empty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw std::runtime_error(what + ": ragged matrix rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    return m;
}

void write_matrix(JsonWriter& w, const Eigen::MatrixXd& m) {
    w.begin_array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        w.begin_array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            w.value(m(r, c));
        }
        w.end_array();
    }
    w.end_array();
}

void write_polynomial_body(JsonWriter& w, const MultiPolynomial& p) {
    w.begin_object();
    w.key("m").value(p.num_vars());
    w.key("terms").begin_array();
    for (const auto& [exp, coef] : p.terms()) {
        w.begin_object();
        w.key("exp").begin_array();
        for (int e : exp) {
            w.value(e);
        }
        w.end_array();
        w.key("coef").value(rational_to_double(coef));
        w.end_object();
    }
    w.end_array();
    w.end_object();
}

MultiPolynomial polynomial_from_json_value(const json& j, const std::string& what) {
    const int m = require(j, "m", what).get<int>();
    MultiPolynomial p(m);
    for (const auto& term : require(j, "terms", what)) {
        const auto& exp_json = require(term, "exp", what);
        Exponents exp;
        exp.reserve(exp_json.size());
        for (const auto& e : exp_json) {
            exp.push_back(e.get<int>());
        }
        if (static_cast<int>(exp.size()) != m) {
            throw std::runtime_error(what + ": exponent tuple length != m");
        }
        p.add_term(exp, rational_from_double(require(term, "coef", what).get<double>()));
    }
    return p;
}

}  // namespace

std::string JsonWriter::format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void JsonWriter::newline_indent() {
    out_.push_back('\n');
    out_.append(2 * has_items_.size(), ' ');
}

void JsonWriter::before_value() {
    if (pending_key_) {
        pending_key_ = false;
        return;
    }
    if (!has_items_.empty()) {
        if (has_items_.back()) {
            out_.push_back(',');
        }
        has_items_.back() = true;
        newline_indent();
    }
}

JsonWriter& JsonWriter::begin_object() {
    before_value();
    out_.push_back('{');
    has_items_.push_back(false);
    return *this;
}

JsonWriter& JsonWriter::end_object() {
    const bool had = has_items_.back();
    has_items_.pop_back();
    if (had) {
        newline_indent();
    }
    out_.push_back('}');
    return *this;
}

JsonWriter& JsonWriter::begin_array() {
    before_value();
    out_.push_back('[');
    has_items_.push_back(false);
    return *this;
}

JsonWriter& JsonWriter::end_array() {
    const bool had = has_items_.back();
    has_items_.pop_back();
    if (had) {
        newline_indent();
    }
    out_.push_back(']');
    return *this;
}

JsonWriter& JsonWriter::key(const std::string& name) {
    if (has_items_.back()) {
        out_.push_back(',');
    }
    has_items_.back() = true;
    newline_indent();
    append_escaped(name);
    out_.append(": ");
    pending_key_ = true;
    return *this;
}

JsonWriter& JsonWriter::value(double v) {
    before_value();
    if (!std::isfinite(v)) {
        out_.append("null");
    } else {
        out_.append(format_double(v));
    }
    return *this;
}

JsonWriter& JsonWriter::value(int v) {
    before_value();
    out_.append(std::to_string(v));
    return *this;
}

JsonWriter& JsonWriter::value(std::int64_t v) {
    before_value();
    out_.append(std::to_string(v));
    return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t v) {
    before_value();
    out_.append(std::to_string(v));
    return *this;
}

JsonWriter& JsonWriter::value(bool v) {
    before_value();
    out_.append(v ? "true" : "false");
    return *this;
}

void JsonWriter::append_escaped(const std::string& v) {
    out_.push_back('"');
    for (char c : v) {
        switch (c) {
            case '"':
                out_.append("\\\"");
                break;
            case '\\':
                out_.append("\\\\");
                break;
            case '\n':
                out_.append("\\n");
                break;
            case '\t':
                out_.append("\\t");
                break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out_.append(buf);
                } else {
                    out_.push_back(c);
                }
        }
    }
    out_.push_back('"');
}

JsonWriter& JsonWriter::value(const std::string& v) {
    before_value();
    append_escaped(v);
    return *this;
}

JsonWriter& JsonWriter::value(const char* v) {
    return value(std::string(v));
}

JsonWriter& JsonWriter::null() {
    before_value();
    out_.append("null");
    return *this;
}

std::string polynomial_to_json(const MultiPolynomial& p) {
    JsonWriter w;
    write_polynomial_body(w, p);
    return w.str();
}

MultiPolynomial polynomial_from_json(const std::string& text) {
    return polynomial_from_json_value(parse_json(text, "polynomial"), "polynomial");
}

std::string function_to_json(const VectorPolynomial& f) {
    JsonWriter w;
    w.begin_object();
    w.key("m").value(f.num_vars());
    w.key("outputs").begin_array();
    for (const auto& p : f.outputs) {
        write_polynomial_body(w, p);
    }
    w.end_array();
    w.end_object();
    return w.str();
}

VectorPolynomial function_from_json(const std::string& text) {
    const json j = parse_json(text, "function");
    const int m = require(j, "m", "function").get<int>();
    VectorPolynomial f;
    for (const auto& out : require(j, "outputs", "function")) {
        f.outputs.push_back(polynomial_from_json_value(out, "function output"));
        if (f.outputs.back().num_vars() != m) {
            throw std::runtime_error("function: output variable count differs from m");
        }
    }
    if (f.outputs.empty()) {
        throw std::runtime_error("function: needs at least one output");
    }
    return f;
}

std::string model_to_json(const DecoupledModel& m) {
    JsonWriter w;
    w.begin_object();
    w.key("W");
    write_matrix(w, m.W);
    w.key("V");
    write_matrix(w, m.V);
    w.key("g").begin_array();
    for (const auto& g : m.g) {
        w.begin_object();
        w.key("coeffs").begin_array();
        for (double c : g.coeffs) {
            w.value(c);
        }
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

DecoupledModel model_from_json(const std::string& text) {
    const json j = parse_json(text, "model");
    DecoupledModel m;
    m.W = matrix_from_json(require(j, "W", "model"), "model W");
    m.V = matrix_from_json(require(j, "V", "model"), "model V");
    for (const auto& gj : require(j, "g", "model")) {
        std::vector<double> coeffs;
        for (const auto& c : require(gj, "coeffs", "model g")) {
            coeffs.push_back(c.get<double>());
        }
        m.g.push_back(UnivariatePolynomial::from_coeffs(std::move(coeffs)));
    }
    m.check_consistent();
    return m;
}

std::string tensor_to_json(const DenseTensor& t) {
    JsonWriter w;
    w.begin_object();
    w.key("dims").begin_array();
    for (int d : t.dims()) {
        w.value(d);
    }
    w.end_array();
    w.key("data").begin_array();
    for (double v : t.data()) {
        w.value(v);
    }
    w.end_array();
    w.end_object();
    return w.str();
}

DenseTensor tensor_from_json(const std::string& text) {
    const json j = parse_json(text, "tensor");
    std::vector<int> dims;
    for (const auto& d : require(j, "dims", "tensor")) {
        dims.push_back(d.get<int>());
    }
    std::vector<double> data;
    for (const auto& v : require(j, "data", "tensor")) {
        data.push_back(v.get<double>());
    }
    return DenseTensor(std::move(dims), std::move(data));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << content;
    if (!out) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

}  // namespace decoupler
