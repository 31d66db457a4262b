#include "specmap/common/keyvalue.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "specmap/common/error.hpp"

namespace specmap::kv {
namespace {

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw ValidationError("line " + std::to_string(line) + ": " + msg);
}

const char* kind_name(Value::Kind k) {
    switch (k) {
    case Value::Kind::String: return "string";
    case Value::Kind::Integer: return "integer";
    case Value::Kind::Float: return "float";
    case Value::Kind::Bool: return "boolean";
    case Value::Kind::Array: return "array";
    }
    return "value";
}

[[noreturn]] void mismatch(std::string_view context, const char* want, Value::Kind got) {
    throw ValidationError(std::string(context) + ": expected " + want + ", found " + kind_name(got));
}

bool is_bare(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.';
}

class LineParser {
public:
    LineParser(std::string_view s, std::size_t line) : s_(s), line_(line) {}

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
    }
    bool at_end_or_comment() {
        skip_ws();
        return pos_ >= s_.size() || s_[pos_] == '#';
    }
    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    void expect(char c) {
        skip_ws();
        if (peek() != c) fail(line_, std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string bare_key() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && is_bare(s_[pos_])) ++pos_;
        if (start == pos_) fail(line_, "expected a key");
        return std::string(s_.substr(start, pos_ - start));
    }

    Value value() {
        skip_ws();
        const char c = peek();
        if (c == '"') return Value::of(quoted());
        if (c == '[') {
            ++pos_;
            std::vector<Value> items;
            skip_ws();
            if (peek() == ']') {
                ++pos_;
                return Value::array(std::move(items));
            }
            while (true) {
                Value item = value();
                if (item.kind == Value::Kind::Array) fail(line_, "nested arrays are not supported");
                items.push_back(std::move(item));
                skip_ws();
                if (peek() == ',') {
                    ++pos_;
                    skip_ws();
                    if (peek() == ']') {
                        ++pos_;
                        break;
                    }
                    continue;
                }
                if (peek() == ']') {
                    ++pos_;
                    break;
                }
                fail(line_, "expected ',' or ']' in array");
            }
            return Value::array(std::move(items));
        }
        const std::size_t start = pos_;
        while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != ' ' && s_[pos_] != '\t' &&
               s_[pos_] != '#' && s_[pos_] != '\r')
            ++pos_;
        const std::string_view tok = s_.substr(start, pos_ - start);
        if (tok.empty()) fail(line_, "missing value");
        if (tok == "true") return Value::of(true);
        if (tok == "false") return Value::of(false);

        std::string cleaned;
        for (char ch : tok)
            if (ch != '_') cleaned.push_back(ch);
        const char* first = cleaned.data();
        const char* last = cleaned.data() + cleaned.size();
        if (*first == '+') ++first;
        const bool looks_float = cleaned.find_first_of(".eE") != std::string::npos;
        if (!looks_float) {
            std::int64_t i = 0;
            const auto [p, ec] = std::from_chars(first, last, i);
            if (ec == std::errc{} && p == last) return Value::of(i);
        }
        double d = 0.0;
        const auto [p, ec] = std::from_chars(first, last, d);
        if (ec != std::errc{} || p != last || !std::isfinite(d)) fail(line_, "bad value '" + std::string(tok) + "'");
        return Value::of(d);
    }

    std::string quoted() {
        ++pos_;  // opening quote
        std::string out;
        while (true) {
            if (pos_ >= s_.size()) fail(line_, "unterminated string");
            const char c = s_[pos_++];
            if (c == '"') break;
            if (c != '\\') {
                out.push_back(c);
                continue;
            }
            if (pos_ >= s_.size()) fail(line_, "unterminated escape");
            const char e = s_[pos_++];
            switch (e) {
            case '"': out.push_back('"'); break;
            case '\\': out.push_back('\\'); break;
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            case 'r': out.push_back('\r'); break;
            default: fail(line_, std::string("unsupported escape \\") + e);
            }
        }
        return out;
    }

    std::string section_name() {
        ++pos_;  // '['
        skip_ws();
        if (peek() == '[') fail(line_, "arrays of tables are not supported");
        std::string name = bare_key();
        expect(']');
        return name;
    }

private:
    std::string_view s_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

void write_value(std::ostringstream& os, const Value& v) {
    switch (v.kind) {
    case Value::Kind::String:
        os << '"';
        for (char c : v.text) {
            switch (c) {
            case '"': os << "\\\""; break;
            case '\\': os << "\\\\"; break;
            case '\n': os << "\\n"; break;
            case '\t': os << "\\t"; break;
            case '\r': os << "\\r"; break;
            default: os << c;
            }
        }
        os << '"';
        break;
    case Value::Kind::Integer: os << v.integer; break;
    case Value::Kind::Float: {
        char buf[64];
        const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v.real);
        std::string s(buf, p);
        if (s.find_first_of(".eE") == std::string::npos) s += ".0";
        os << s;
        break;
    }
    case Value::Kind::Bool: os << (v.flag ? "true" : "false"); break;
    case Value::Kind::Array:
        os << '[';
        for (std::size_t i = 0; i < v.items.size(); ++i) {
            if (i) os << ", ";
            write_value(os, v.items[i]);
        }
        os << ']';
        break;
    }
}

} // namespace

Value Value::of(std::string s) {
    Value v;
    v.kind = Kind::String;
    v.text = std::move(s);
    return v;
}
Value Value::of(std::int64_t i) {
    Value v;
    v.kind = Kind::Integer;
    v.integer = i;
    return v;
}
Value Value::of(double d) {
    Value v;
    v.kind = Kind::Float;
    v.real = d;
    return v;
}
Value Value::of(bool b) {
    Value v;
    v.kind = Kind::Bool;
    v.flag = b;
    return v;
}
Value Value::array(std::vector<Value> items) {
    Value v;
    v.kind = Kind::Array;
    v.items = std::move(items);
    return v;
}

const std::string& Value::as_string(std::string_view context) const {
    if (kind != Kind::String) mismatch(context, "string", kind);
    return text;
}
std::int64_t Value::as_int(std::string_view context) const {
    if (kind != Kind::Integer) mismatch(context, "integer", kind);
    return integer;
}
double Value::as_double(std::string_view context) const {
    if (kind == Kind::Integer) return static_cast<double>(integer);
    if (kind != Kind::Float) mismatch(context, "number", kind);
    return real;
}
bool Value::as_bool(std::string_view context) const {
    if (kind != Kind::Bool) mismatch(context, "boolean", kind);
    return flag;
}
const std::vector<Value>& Value::as_array(std::string_view context) const {
    if (kind != Kind::Array) mismatch(context, "array", kind);
    return items;
}
std::vector<double> Value::as_doubles(std::string_view context) const {
    std::vector<double> out;
    for (const auto& item : as_array(context)) out.push_back(item.as_double(context));
    return out;
}

const Value* Section::find(std::string_view key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return &v;
    return nullptr;
}

void Section::set(std::string key, Value value) {
    for (auto& [k, v] : entries) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    entries.emplace_back(std::move(key), std::move(value));
}

const Section* Document::find(std::string_view name) const {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

Section& Document::section(std::string_view name) {
    for (auto& s : sections)
        if (s.name == name) return s;
    sections.push_back({std::string(name), {}});
    return sections.back();
}

const Value* Document::get(std::string_view section, std::string_view key) const {
    const Section* s = find(section);
    return s ? s->find(key) : nullptr;
}

Document parse(std::string_view text) {
    Document doc;
    doc.sections.push_back({"", {}});
    std::size_t current = 0;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        const std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        LineParser p(line, line_no);
        if (p.at_end_or_comment()) continue;
        if (p.peek() == '[') {
            std::string name = p.section_name();
            if (!p.at_end_or_comment()) fail(line_no, "trailing characters after section header");
            if (doc.find(name)) fail(line_no, "duplicate section [" + name + "]");
            doc.sections.push_back({std::move(name), {}});
            current = doc.sections.size() - 1;
            continue;
        }
        std::string key = p.bare_key();
        p.expect('=');
        Value v = p.value();
        if (!p.at_end_or_comment()) fail(line_no, "trailing characters after value");
        auto& sec = doc.sections[current];
        if (sec.find(key)) fail(line_no, "duplicate key '" + key + "'");
        sec.entries.emplace_back(std::move(key), std::move(v));
    }
    if (doc.sections.front().entries.empty()) doc.sections.erase(doc.sections.begin());
    return doc;
}

Document parse_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string serialize(const Document& doc) {
    std::ostringstream os;
    bool first = true;
    for (const auto& sec : doc.sections) {
        if (!sec.name.empty()) {
            if (!first) os << '\n';
            os << '[' << sec.name << "]\n";
        }
        for (const auto& [k, v] : sec.entries) {
            os << k << " = ";
            write_value(os, v);
            os << '\n';
        }
        first = false;
    }
    return os.str();
}

} // namespace specmap::kv
