#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace specmap::kv {

/// A value in the TOML-style documents used for project manifests and cube
/// descriptors: string, integer, float, bool, or a flat array of those.
struct Value {
    enum class Kind { String, Integer, Float, Bool, Array };

    Kind kind = Kind::String;
    std::string text;
    std::int64_t integer = 0;
    double real = 0.0;
    bool flag = false;
    std::vector<Value> items;

    static Value of(std::string s);
    static Value of(const char* s) { return of(std::string(s)); }
    static Value of(std::int64_t i);
    static Value of(int i) { return of(static_cast<std::int64_t>(i)); }
    static Value of(double d);
    static Value of(bool b);
    static Value array(std::vector<Value> items);

    // Accessors throw ValidationError naming `context` on a type mismatch.
    const std::string& as_string(std::string_view context) const;
    std::int64_t as_int(std::string_view context) const;
    double as_double(std::string_view context) const;  // integers widen
    bool as_bool(std::string_view context) const;
    const std::vector<Value>& as_array(std::string_view context) const;
    std::vector<double> as_doubles(std::string_view context) const;
};

struct Section {
    std::string name;  // "" for keys before the first [header]
    std::vector<std::pair<std::string, Value>> entries;

    const Value* find(std::string_view key) const;
    void set(std::string key, Value value);
};

/// Ordered sections with ordered keys; order is preserved on write.
struct Document {
    std::vector<Section> sections;

    const Section* find(std::string_view name) const;
    Section& section(std::string_view name);  // creates if missing
    /// Looks up "section" + "key"; nullptr when absent.
    const Value* get(std::string_view section, std::string_view key) const;
};

/// Parses the subset: `# comments`, `[section.name]` headers, `key = value`
/// with basic double-quoted strings, integers, floats, booleans and
/// single-line arrays. Duplicate sections or keys are errors.
Document parse(std::string_view text);
Document parse_file(const std::filesystem::path& path);

std::string serialize(const Document& doc);

} // namespace specmap::kv
